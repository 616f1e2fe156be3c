#include "dircal/scaling.hpp"

#include <cmath>

#include "multinomial.hpp"

namespace dircal::scaling {
namespace {

void require_temperature(TemperatureParams t) {
  if (!(t.t > 0.0) || !std::isfinite(t.t)) {
    throw InvalidInput("temperature must be positive and finite");
  }
}

detail::MultinomialProblem make_problem(const LogitDataset& data, AffineMode mode,
                                        const dirichlet::OdirConfig& reg) {
  if (reg.lambda < 0.0 || reg.mu < 0.0) {
    throw InvalidInput("ODIR lambda and mu must be nonnegative");
  }
  const Index k = data.classes();
  const double kd = static_cast<double>(k);
  Matrix w_pen = Matrix::Zero(k, k);
  if (mode == AffineMode::kMatrix) {
    w_pen.setConstant(reg.lambda / (kd * (kd - 1.0)));
    w_pen.diagonal().setZero();
  }
  Vector b_pen = Vector::Constant(k, reg.mu / kd);
  return detail::MultinomialProblem(
      data.predictions().values(), data.labels().values(),
      mode == AffineMode::kMatrix ? detail::WeightLayout::kFull : detail::WeightLayout::kDiagonal,
      std::move(w_pen), std::move(b_pen));
}

}  // namespace

void AffineLogitParams::validate() const {
  if (b.size() < 2) throw InvalidInput("affine logit map needs at least 2 classes");
  if (W.rows() != b.size() || W.cols() != b.size()) {
    throw InvalidInput("affine logit params: W must be k x k with k = len(b)");
  }
  if (!W.allFinite() || !b.allFinite()) throw InvalidInput("affine logit params: non-finite entry");
}

Vector apply_temperature(const Eigen::Ref<const Vector>& z, TemperatureParams t) {
  require_temperature(t);
  return softmax(z / t.t);
}

ProbabilityMatrix apply_temperature(const LogitMatrix& z, TemperatureParams t) {
  require_temperature(t);
  return softmax_rows(z.values() / t.t);
}

double temperature_log_loss(const LogitDataset& data, TemperatureParams t) {
  require_temperature(t);
  const Matrix& z = data.predictions().values();
  double nll = 0.0;
  for (Index i = 0; i < z.rows(); ++i) {
    const Eigen::RowVectorXd s = z.row(i) / t.t;
    const Index top = argmax(s);
    double rest = 0.0;
    for (Index j = 0; j < s.size(); ++j) {
      if (j != top) rest += std::exp(s(j) - s(top));
    }
    // log1p keeps confident rows from rounding to exactly zero loss.
    nll += (s(top) - s(data.labels()[static_cast<std::size_t>(i)])) + std::log1p(rest);
  }
  return nll / static_cast<double>(z.rows());
}

TemperatureFit fit_temperature(const LogitDataset& data, TemperatureBounds bounds) {
  if (!(bounds.t_min > 0.0) || !(bounds.t_min < bounds.t_max)) {
    throw InvalidInput("temperature bounds must satisfy 0 < t_min < t_max");
  }
  const double lo = std::log(bounds.t_min);
  const double hi = std::log(bounds.t_max);
  const double log_t = optim::minimize_scalar(
      [&](double s) { return temperature_log_loss(data, TemperatureParams{std::exp(s)}); }, lo, hi,
      1e-10);
  TemperatureFit out;
  if (log_t == lo) {
    out.params.t = bounds.t_min;
  } else if (log_t == hi) {
    out.params.t = bounds.t_max;
  } else {
    out.params.t = std::exp(log_t);
  }
  out.at_bound = std::abs(log_t - lo) < 1e-6 || std::abs(log_t - hi) < 1e-6;
  return out;
}

dirichlet::LinearParams temperature_as_dirichlet(TemperatureParams t, Index k) {
  require_temperature(t);
  if (k < 2) throw InvalidInput("temperature_as_dirichlet: need at least 2 classes");
  return dirichlet::LinearParams{Matrix::Identity(k, k) / t.t, Vector::Zero(k)};
}

ProbabilityMatrix apply_affine_logit(const LogitMatrix& z, const AffineLogitParams& params) {
  params.validate();
  if (z.classes() != params.classes()) {
    throw InvalidInput("affine logit map: class count mismatch");
  }
  Matrix scores = z.values() * params.W.transpose();
  scores.rowwise() += params.b.transpose();
  return softmax_rows(scores);
}

Vector apply_affine_logit(const Eigen::Ref<const Vector>& z, const AffineLogitParams& params) {
  return softmax(params.W * z + params.b);
}

double affine_log_loss(const LogitDataset& data, const AffineLogitParams& params) {
  const auto problem = make_problem(data, AffineMode::kMatrix, {});
  return problem.mean_log_loss(params.W, params.b);
}

dirichlet::ObjectiveValue affine_objective_and_gradient(const AffineLogitParams& params,
                                                        const LogitDataset& data, AffineMode mode,
                                                        const dirichlet::OdirConfig& reg) {
  params.validate();
  const auto problem = make_problem(data, mode, reg);
  dirichlet::ObjectiveValue out;
  out.value = problem.value(problem.pack(params.W, params.b), &out.gradient);
  return out;
}

AffineFit fit_affine_logit(const LogitDataset& data, AffineMode mode,
                           const dirichlet::OdirConfig& reg, const optim::Options& options) {
  if (data.rows() < data.classes()) {
    throw InvalidInput("affine logit fit needs at least as many rows as classes");
  }
  const auto problem = make_problem(data, mode, reg);
  AffineFit out;
  out.diagnostics = detail::fit_multinomial(problem, options);
  problem.unpack(out.diagnostics.params, &out.params.W, &out.params.b);
  return out;
}

AffineLogitParams zero_offdiagonal(const AffineLogitParams& p) {
  AffineLogitParams out{Matrix::Zero(p.W.rows(), p.W.cols()), p.b};
  out.W.diagonal() = p.W.diagonal();
  return out;
}

}  // namespace dircal::scaling
