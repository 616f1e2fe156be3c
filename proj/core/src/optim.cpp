#include "dircal/optim.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Cholesky>

namespace dircal::optim {
namespace {

bool finite(double v) { return std::isfinite(v); }

// Newton direction from a Cholesky solve of H + tau*I. The small relative
// ridge keeps exactly singular Hessians (unregularized softmax models have a
// null space) solvable; it grows until the factorization succeeds.
bool newton_direction(const Matrix& hessian, const Vector& grad, Vector* dir) {
  const Index d = hessian.rows();
  const double scale = std::max(1e-300, hessian.diagonal().cwiseAbs().sum() / static_cast<double>(d));
  double tau = 1e-10 * scale;
  for (int attempt = 0; attempt < 8; ++attempt, tau *= 100.0) {
    Matrix shifted = hessian;
    shifted.diagonal().array() += tau;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Vector step = -llt.solve(grad);
    if (step.allFinite()) {
      *dir = std::move(step);
      return true;
    }
  }
  return false;
}

// Two-loop recursion for the L-BFGS inverse-Hessian product.
Vector lbfgs_direction(const Vector& grad, const std::deque<Vector>& s_hist,
                       const std::deque<Vector>& y_hist) {
  Vector q = grad;
  const std::size_t m = s_hist.size();
  std::vector<double> alpha(m), rho(m);
  for (std::size_t i = m; i-- > 0;) {
    rho[i] = 1.0 / y_hist[i].dot(s_hist[i]);
    alpha[i] = rho[i] * s_hist[i].dot(q);
    q -= alpha[i] * y_hist[i];
  }
  if (m > 0) {
    q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
  } else {
    q /= std::max(1.0, grad.norm());
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double beta = rho[i] * y_hist[i].dot(q);
    q += (alpha[i] - beta) * s_hist[i];
  }
  return -q;
}

}  // namespace

Result minimize(const Objective& objective, Vector x0, const Options& options) {
  if (!(options.tolerance > 0.0)) {
    throw InvalidInput("minimize: tolerance must be positive");
  }
  Result result;
  Vector x = std::move(x0);
  Vector g(x.size());
  double f = objective.value(x, &g);
  if (!finite(f) || !g.allFinite()) {
    throw FitError("minimize: objective is not finite at the starting point", x);
  }
  const bool use_newton = static_cast<bool>(objective.hessian) &&
                          static_cast<std::size_t>(x.size()) <= options.newton_max_dimension;
  std::deque<Vector> s_hist, y_hist;
  result.trace.push_back(f);

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= options.tolerance) break;

    Vector dir;
    bool have_dir = false;
    if (use_newton) {
      have_dir = newton_direction(objective.hessian(x), g, &dir);
    } else {
      dir = lbfgs_direction(g, s_hist, y_hist);
      have_dir = dir.allFinite();
    }
    double slope = have_dir ? g.dot(dir) : 0.0;
    if (!have_dir || !(slope < 0.0)) {
      dir = -g;
      slope = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
    }

    double step = options.initial_step;
    Vector x_new, g_new(x.size());
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    bool saw_finite = false;
    while (step > 1e-20) {
      x_new = x + step * dir;
      f_new = objective.value(x_new, &g_new);
      if (finite(f_new) && g_new.allFinite()) {
        saw_finite = true;
        if (f_new <= f + options.armijo * step * slope && f_new < f) {
          accepted = true;
          break;
        }
      }
      step *= options.backtrack;
    }
    if (!accepted) {
      if (!saw_finite) {
        throw FitError("minimize: objective became non-finite along the search direction", x);
      }
      // No representable decrease left: we are at the roundoff floor.
      break;
    }

    if (!use_newton) {
      Vector s = x_new - x;
      Vector y = g_new - g;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        s_hist.push_back(std::move(s));
        y_hist.push_back(std::move(y));
        if (static_cast<int>(s_hist.size()) > options.lbfgs_memory) {
          s_hist.pop_front();
          y_hist.pop_front();
        }
      }
    }
    x = std::move(x_new);
    f = f_new;
    result.trace.push_back(f);
    g = g_new;
  }

  result.params = std::move(x);
  result.final_value = f;
  result.iterations = iter;
  result.gradient_norm = g.lpNorm<Eigen::Infinity>();
  result.converged = result.gradient_norm <= options.tolerance;
  return result;
}

double minimize_scalar(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo < hi)) {
    throw InvalidInput("minimize_scalar: lower bound must be below upper bound");
  }
  if (!(tol > 0.0)) {
    throw InvalidInput("minimize_scalar: tolerance must be positive");
  }
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double best = 0.5 * (a + b);
  double f_best = f(best);
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo < f_best) {
    best = lo;
    f_best = f_lo;
  }
  if (f_hi < f_best) best = hi;
  return best;
}

}  // namespace dircal::optim
