#pragma once

// Binary calibrators and the one-vs-rest wrapper that turns k of them into a
// multiclass map by renormalizing their outputs.

#include <span>
#include <variant>
#include <vector>

#include "dircal/core.hpp"

namespace dircal::ovr {

/// Stepwise-constant monotone map fitted by pool-adjacent-violators.
struct IsotonicMap {
  std::vector<double> breakpoints;  // strictly increasing
  std::vector<double> values;       // non-decreasing

  /// Value at the last breakpoint <= score; the first value below range.
  double predict(double score) const;
};

enum class BinningScheme { kEqualWidth, kEqualFrequency };

struct BinningMap {
  std::vector<double> edges;  // m+1 edges, edges.front() == 0, edges.back() == 1
  std::vector<double> bin_values;
  BinningScheme scheme = BinningScheme::kEqualWidth;

  /// Half-open bins [e_i, e_{i+1}), the last one closed.
  double predict(double score) const;
};

/// p -> sigmoid(a ln p - b ln(1-p) + c).
struct BetaParams {
  double a = 1.0;
  double b = 1.0;
  double c = 0.0;

  double predict(double p) const;
};

using BinaryCalibrator = std::variant<IsotonicMap, BinningMap, BetaParams>;

double predict(const BinaryCalibrator& calibrator, double score);

/// Weighted monotone (non-decreasing) least squares by pool-adjacent-violators.
std::vector<double> pava(std::span<const double> y, std::span<const double> weights);

IsotonicMap fit_isotonic(std::span<const double> scores, std::span<const int> labels);

BinningMap fit_binning(std::span<const double> scores, std::span<const int> labels, int bins,
                       BinningScheme scheme);

/// Two-class Dirichlet fit on rows (p, 1-p) with ridge `lambda`, reduced to
/// (a, b, c). Scores are clamped into (0, 1) first.
BetaParams fit_beta(std::span<const double> scores, std::span<const int> labels,
                    double lambda = 1e-10);

enum class OvrKind { kIsotonic, kWidthBinning, kFrequencyBinning, kBeta };

struct OvrConfig {
  OvrKind kind = OvrKind::kIsotonic;
  int bins = 10;
  double beta_lambda = 1e-10;
};

struct OneVsRestModel {
  std::vector<BinaryCalibrator> per_class;

  Index classes() const { return static_cast<Index>(per_class.size()); }
};

/// Calibrator j is fitted on column j against the indicator of label j.
OneVsRestModel fit_ovr(const ProbabilityDataset& data, const OvrConfig& config);

/// Per-class maps, then renormalization. All-zero outputs give the uniform vector.
Vector apply_ovr(const Eigen::Ref<const Vector>& q, const OneVsRestModel& model);
ProbabilityMatrix apply_ovr(const ProbabilityMatrix& q, const OneVsRestModel& model);

}  // namespace dircal::ovr
