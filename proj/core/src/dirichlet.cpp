#include "dircal/dirichlet.hpp"

#include <cmath>

#include "multinomial.hpp"

namespace dircal::dirichlet {
namespace {

constexpr double kZeroTolerance = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(const Eigen::Ref<const Vector>& q, const char* what) {
  if ((q.array() <= 0.0).any() || !q.allFinite()) {
    throw DomainError(std::string(what) + ": probabilities must be strictly positive; clip first");
  }
}

void penalty_weights(const Regularization& reg, Index k, Matrix* w_pen, Vector* b_pen) {
  const double kd = static_cast<double>(k);
  std::visit(overloaded{
                 [&](const L2Config& l2) {
                   if (l2.lambda < 0.0) throw InvalidInput("L2 lambda must be nonnegative");
                   const double count = l2.penalize_intercept ? kd * kd + kd : kd * kd;
                   *w_pen = Matrix::Constant(k, k, l2.lambda / count);
                   *b_pen = Vector::Constant(k, l2.penalize_intercept ? l2.lambda / count : 0.0);
                 },
                 [&](const OdirConfig& odir) {
                   if (odir.lambda < 0.0 || odir.mu < 0.0) {
                     throw InvalidInput("ODIR lambda and mu must be nonnegative");
                   }
                   *w_pen = Matrix::Constant(k, k, odir.lambda / (kd * (kd - 1.0)));
                   w_pen->diagonal().setZero();
                   *b_pen = Vector::Constant(k, odir.mu / kd);
                 },
             },
             reg);
}

detail::MultinomialProblem make_problem(const ProbabilityDataset& data, const Regularization& reg) {
  Matrix w_pen;
  Vector b_pen;
  penalty_weights(reg, data.classes(), &w_pen, &b_pen);
  return detail::MultinomialProblem(log_transform(data.predictions()), data.labels().values(),
                                    detail::WeightLayout::kFull, std::move(w_pen),
                                    std::move(b_pen));
}

}  // namespace

void LinearParams::validate() const {
  if (b.size() < 2) throw InvalidInput("Dirichlet map needs at least 2 classes");
  if (W.rows() != b.size() || W.cols() != b.size()) {
    throw InvalidInput("linear params: W must be k x k with k = len(b)");
  }
  if (!W.allFinite() || !b.allFinite()) throw InvalidInput("linear params: non-finite entry");
}

void CanonicalParams::validate() const {
  const Index k = c.size();
  if (k < 2) throw InvalidInput("Dirichlet map needs at least 2 classes");
  if (A.rows() != k || A.cols() != k) throw InvalidInput("canonical params: A must be k x k");
  if (!A.allFinite() || !c.allFinite()) throw InvalidInput("canonical params: non-finite entry");
  if ((A.array() < -kZeroTolerance).any()) {
    throw InvalidInput("canonical params: A must be nonnegative");
  }
  for (Index j = 0; j < k; ++j) {
    if (A.col(j).minCoeff() > kZeroTolerance) {
      throw InvalidInput("canonical params: every column of A needs a zero entry");
    }
  }
  if ((c.array() < 0.0).any() || std::abs(c.sum() - 1.0) > kSimplexTolerance) {
    throw InvalidInput("canonical params: c must lie on the simplex");
  }
}

void GenerativeParams::validate() const {
  const Index k = pi.size();
  if (k < 2) throw InvalidInput("Dirichlet map needs at least 2 classes");
  if (alpha.rows() != k || alpha.cols() != k) {
    throw InvalidInput("generative params: alpha must be k x k");
  }
  if (!alpha.allFinite() || (alpha.array() <= 0.0).any()) {
    throw InvalidInput("generative params: alpha entries must be positive");
  }
  if (!pi.allFinite() || (pi.array() < 0.0).any() || std::abs(pi.sum() - 1.0) > kSimplexTolerance) {
    throw InvalidInput("generative params: pi must lie on the simplex");
  }
}

Vector apply_linear(const Eigen::Ref<const Vector>& q, const LinearParams& params) {
  require_positive(q, "apply_linear");
  return softmax(params.W * q.array().log().matrix() + params.b);
}

ProbabilityMatrix apply_linear(const ProbabilityMatrix& q, const LinearParams& params) {
  Matrix scores = log_transform(q) * params.W.transpose();
  scores.rowwise() += params.b.transpose();
  return softmax_rows(scores);
}

Vector apply_canonical(const Eigen::Ref<const Vector>& q, const CanonicalParams& params) {
  require_positive(q, "apply_canonical");
  if ((params.c.array() <= 0.0).any()) {
    throw DomainError("apply_canonical: c has a zero entry");
  }
  const double k = static_cast<double>(q.size());
  return softmax(params.A * (q.array() * k).log().matrix() + params.c.array().log().matrix());
}

double log_multivariate_beta(const Eigen::Ref<const Vector>& a) {
  double sum_lgamma = 0.0;
  for (Index i = 0; i < a.size(); ++i) sum_lgamma += std::lgamma(a(i));
  return sum_lgamma - std::lgamma(a.sum());
}

Vector apply_generative(const Eigen::Ref<const Vector>& q, const GenerativeParams& params) {
  require_positive(q, "apply_generative");
  const Index k = q.size();
  const Vector log_q = q.array().log();
  Vector log_joint(k);
  for (Index j = 0; j < k; ++j) {
    // ln(pi_j) + ln Dir(q; alpha_j)
    const Vector a = params.alpha.row(j).transpose();
    log_joint(j) = std::log(params.pi(j)) - log_multivariate_beta(a) +
                   ((a.array() - 1.0) * log_q.array()).sum();
  }
  if (log_joint.array().isNaN().any() || (log_joint.array() == INFINITY).any()) {
    throw DomainError("apply_generative: density is not finite");
  }
  if ((log_joint.array() == -INFINITY).all()) {
    throw DomainError("apply_generative: every class has zero density");
  }
  const double shift = log_joint.maxCoeff();
  Vector out = (log_joint.array() - shift).exp();
  return out / out.sum();
}

LinearParams from_generative(const GenerativeParams& g) {
  g.validate();
  if ((g.pi.array() <= 0.0).any()) {
    throw DomainError("from_generative: zero prior has no finite intercept");
  }
  const Index k = g.classes();
  LinearParams out{g.alpha.array() - 1.0, Vector(k)};
  for (Index i = 0; i < k; ++i) {
    out.b(i) = std::log(g.pi(i)) - log_multivariate_beta(g.alpha.row(i).transpose());
  }
  return out;
}

CanonicalParams to_canonical(const LinearParams& p) {
  p.validate();
  const Index k = p.classes();
  CanonicalParams out;
  out.A = p.W;
  for (Index j = 0; j < k; ++j) {
    const double col_min = p.W.col(j).minCoeff();
    out.A.col(j).array() -= col_min;
    // Entries tied at the minimum subtract to exactly zero.
  }
  const Vector log_u = Vector::Constant(k, -std::log(static_cast<double>(k)));
  out.c = softmax(p.W * log_u + p.b);
  return out;
}

LinearParams to_linear(const CanonicalParams& p) {
  p.validate();
  if ((p.c.array() <= 0.0).any()) throw DomainError("to_linear: c has a zero entry");
  const Index k = p.classes();
  const Vector log_u = Vector::Constant(k, -std::log(static_cast<double>(k)));
  return LinearParams{p.A, p.c.array().log().matrix() - p.A * log_u};
}

GenerativeParams to_generative(const CanonicalParams& p) {
  p.validate();
  if ((p.c.array() <= 0.0).any()) throw DomainError("to_generative: c has a zero entry");
  const Index k = p.classes();
  const Vector log_u = Vector::Constant(k, -std::log(static_cast<double>(k)));
  GenerativeParams out;
  out.alpha = p.A.array() + 1.0;
  const Vector b = p.c.array().log().matrix() - p.A * log_u;
  // pi_i is proportional to exp(b_i) B(alpha_i); normalize in log space.
  Vector log_pi(k);
  for (Index i = 0; i < k; ++i) {
    log_pi(i) = b(i) + log_multivariate_beta(out.alpha.row(i).transpose());
  }
  out.pi = softmax(log_pi);
  return out;
}

ObjectiveValue objective_and_gradient(const LinearParams& params, const ProbabilityDataset& data,
                                      const Regularization& reg) {
  params.validate();
  if (params.classes() != data.classes()) {
    throw InvalidInput("objective: parameter and data class counts differ");
  }
  const auto problem = make_problem(data, reg);
  ObjectiveValue out;
  out.value = problem.value(problem.pack(params.W, params.b), &out.gradient);
  return out;
}

double log_loss(const LinearParams& params, const ProbabilityDataset& data) {
  const auto problem = make_problem(data, L2Config{0.0, true});
  return problem.mean_log_loss(params.W, params.b);
}

FitResult fit(const ProbabilityDataset& data, const Regularization& reg,
              const optim::Options& options) {
  if (data.rows() < data.classes()) {
    throw InvalidInput("Dirichlet fit needs at least as many rows as classes");
  }
  const auto problem = make_problem(data, reg);
  FitResult out;
  out.diagnostics = detail::fit_multinomial(problem, options);
  problem.unpack(out.diagnostics.params, &out.params.W, &out.params.b);
  return out;
}

LinearParams zero_offdiagonal(const LinearParams& p) {
  LinearParams out{Matrix::Zero(p.W.rows(), p.W.cols()), p.b};
  out.W.diagonal() = p.W.diagonal();
  return out;
}

std::vector<InterpretationPoint> interpretation_points(const CanonicalParams& params,
                                                       double epsilon) {
  params.validate();
  const Index k = params.classes();
  if (!(epsilon > 0.0) || !(epsilon < 1.0 / static_cast<double>(k))) {
    throw InvalidInput("interpretation points: epsilon must lie in (0, 1/k)");
  }
  std::vector<InterpretationPoint> out;
  out.reserve(static_cast<std::size_t>(k + 1));
  for (Index j = 0; j < k; ++j) {
    Vector q = Vector::Constant(k, (1.0 - epsilon) / static_cast<double>(k - 1));
    q(j) = epsilon;
    Vector image = apply_canonical(q, params);
    out.push_back({std::move(q), std::move(image)});
  }
  // apply_canonical at the centre is softmax(ln c) = c up to rounding; the
  // centre maps to c by construction.
  out.push_back({Vector::Constant(k, 1.0 / static_cast<double>(k)), params.c});
  return out;
}

}  // namespace dircal::dirichlet
