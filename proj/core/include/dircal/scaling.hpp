#pragma once

// Logit-space calibrators: temperature scaling, vector scaling and matrix
// scaling with off-diagonal and intercept regularisation.

#include "dircal/core.hpp"
#include "dircal/dirichlet.hpp"
#include "dircal/optim.hpp"

namespace dircal::scaling {

struct TemperatureBounds {
  double t_min = 1e-2;
  double t_max = 1e2;
};

struct TemperatureParams {
  double t = 1.0;
};

struct TemperatureFit {
  TemperatureParams params;
  /// The optimum sits on a search bound; the data would prefer a more extreme t.
  bool at_bound = false;
};

enum class AffineMode { kVector, kMatrix };

/// softmax(W z + b); W is diagonal in vector mode.
struct AffineLogitParams {
  Matrix W;
  Vector b;

  Index classes() const { return b.size(); }
  void validate() const;
};

struct AffineFit {
  AffineLogitParams params;
  optim::Result diagnostics;
};

ProbabilityMatrix apply_temperature(const LogitMatrix& z, TemperatureParams t);
Vector apply_temperature(const Eigen::Ref<const Vector>& z, TemperatureParams t);

/// Mean log-loss of softmax(z / t).
double temperature_log_loss(const LogitDataset& data, TemperatureParams t);

/// Golden-section search on ln t within the bounds.
TemperatureFit fit_temperature(const LogitDataset& data, TemperatureBounds bounds = {});

/// The same map acting on k-class probabilities: W = I / t, b = 0.
dirichlet::LinearParams temperature_as_dirichlet(TemperatureParams t, Index k);

ProbabilityMatrix apply_affine_logit(const LogitMatrix& z, const AffineLogitParams& params);
Vector apply_affine_logit(const Eigen::Ref<const Vector>& z, const AffineLogitParams& params);

/// Mean log-loss of softmax(W z + b), no penalty.
double affine_log_loss(const LogitDataset& data, const AffineLogitParams& params);

/// Penalized objective over the mode's free parameters (W row-major then b
/// in matrix mode, diag(W) then b in vector mode).
dirichlet::ObjectiveValue affine_objective_and_gradient(const AffineLogitParams& params,
                                                        const LogitDataset& data, AffineMode mode,
                                                        const dirichlet::OdirConfig& reg);

/// In vector mode only the diagonal and intercepts are fitted and the
/// off-diagonal penalty is vacuous. Requires n >= k.
AffineFit fit_affine_logit(const LogitDataset& data, AffineMode mode,
                           const dirichlet::OdirConfig& reg, const optim::Options& options = {});

AffineLogitParams zero_offdiagonal(const AffineLogitParams& p);

}  // namespace dircal::scaling
