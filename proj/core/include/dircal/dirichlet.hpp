#pragma once

// Dirichlet calibration maps in their three equivalent parametrizations:
//
//   generative  (alpha, pi): class-conditional Dirichlet densities and priors
//   linear      (W, b):      softmax(W ln q + b), used for fitting
//   canonical   (A, c):      softmax(A ln(k q) + ln c), unique and readable
//
// Conversions go generative -> linear -> canonical -> generative, and each
// preserves the map pointwise.

#include <variant>
#include <vector>

#include "dircal/core.hpp"
#include "dircal/optim.hpp"

namespace dircal::dirichlet {

struct LinearParams {
  Matrix W;
  Vector b;

  Index classes() const { return b.size(); }
  /// Throws InvalidInput on shape mismatch, k < 2 or non-finite entries.
  void validate() const;
};

/// A >= 0 with a zero in every column, c on the simplex.
struct CanonicalParams {
  Matrix A;
  Vector c;

  Index classes() const { return c.size(); }
  void validate() const;
};

/// Row j of `alpha` holds the Dirichlet parameters of class j.
struct GenerativeParams {
  Matrix alpha;
  Vector pi;

  Index classes() const { return pi.size(); }
  void validate() const;
};

/// Off-diagonal and intercept regularisation: the penalty is
/// lambda * mean of squared off-diagonal weights + mu * mean of squared
/// intercepts. Diagonal weights are free.
struct OdirConfig {
  double lambda = 0.0;
  double mu = 0.0;
};

/// Plain ridge penalty: lambda times the mean of all squared weights and,
/// unless disabled, intercepts.
struct L2Config {
  double lambda = 0.0;
  bool penalize_intercept = true;
};

using Regularization = std::variant<L2Config, OdirConfig>;

Vector apply_linear(const Eigen::Ref<const Vector>& q, const LinearParams& params);
ProbabilityMatrix apply_linear(const ProbabilityMatrix& q, const LinearParams& params);

Vector apply_canonical(const Eigen::Ref<const Vector>& q, const CanonicalParams& params);

/// Bayes-rule posterior over classes with densities evaluated in log space.
Vector apply_generative(const Eigen::Ref<const Vector>& q, const GenerativeParams& params);

/// log of the multivariate beta function, sum(lgamma(a)) - lgamma(sum(a)).
double log_multivariate_beta(const Eigen::Ref<const Vector>& a);

LinearParams from_generative(const GenerativeParams& g);
CanonicalParams to_canonical(const LinearParams& p);
GenerativeParams to_generative(const CanonicalParams& p);
/// Linear form of a canonical map: W = A, b = ln c - A ln u.
LinearParams to_linear(const CanonicalParams& p);

struct ObjectiveValue {
  double value = 0.0;
  Vector gradient;  // W row-major, then b
};

/// Mean log-loss of apply_linear on the data plus the penalty, with its
/// analytic gradient. Data must be strictly positive (clipped).
ObjectiveValue objective_and_gradient(const LinearParams& params, const ProbabilityDataset& data,
                                      const Regularization& reg);

/// Mean log-loss of apply_linear on the data, no penalty.
double log_loss(const LinearParams& params, const ProbabilityDataset& data);

struct FitResult {
  LinearParams params;
  optim::Result diagnostics;
};

/// Minimizes the penalized log-loss from the identity map. Requires n >= k.
FitResult fit(const ProbabilityDataset& data, const Regularization& reg,
              const optim::Options& options = {});

/// Copy of `p` with off-diagonal weights set to zero.
LinearParams zero_offdiagonal(const LinearParams& p);

struct InterpretationPoint {
  Vector point;
  Vector image;
};

inline constexpr double kDefaultInterpretationEpsilon = 1e-6;

/// The k near-facet-centre points (epsilon at position j, the rest equal)
/// followed by the simplex centre, each paired with its calibrated image.
std::vector<InterpretationPoint> interpretation_points(
    const CanonicalParams& params, double epsilon = kDefaultInterpretationEpsilon);

}  // namespace dircal::dirichlet
