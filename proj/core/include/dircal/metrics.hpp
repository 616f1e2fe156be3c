#pragma once

// Evaluation measures for probabilistic classifiers and the binned data
// behind reliability diagrams.
//
// Bins are equal-width over [0,1], half-open [i/m, (i+1)/m) with the last
// bin closed. Argmax ties resolve to the lowest class index everywhere.

#include <optional>
#include <vector>

#include "dircal/core.hpp"

namespace dircal::metrics {

inline constexpr int kDefaultBins = 15;

enum class ReliabilityMode { kConfidence, kClasswise };

struct ReliabilityBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
  double mean_predicted = 0.0;       // mean confidence or mean class-j probability
  double empirical_frequency = 0.0;  // accuracy or class-j proportion
};

struct ReliabilityBins {
  ReliabilityMode mode = ReliabilityMode::kConfidence;
  int cls = -1;  // class index in classwise mode
  std::size_t total = 0;
  std::vector<ReliabilityBin> bins;

  /// Instance-weighted mean absolute gap over nonempty bins.
  double ece() const;
  /// Largest absolute gap over nonempty bins; 0 when all are empty.
  double max_gap() const;
};

/// Bin index of a value in [0,1] under m equal-width bins.
int bin_index(double value, int bins);

ReliabilityBins confidence_reliability(const ProbabilityMatrix& p, const LabelVector& y,
                                       int bins = kDefaultBins);
ReliabilityBins classwise_reliability(const ProbabilityMatrix& p, const LabelVector& y, int cls,
                                      int bins = kDefaultBins);

double confidence_ece(const ProbabilityMatrix& p, const LabelVector& y, int bins = kDefaultBins);

struct ClasswiseEce {
  double cw_ece = 0.0;
  Vector per_class;
};
ClasswiseEce classwise_ece(const ProbabilityMatrix& p, const LabelVector& y,
                           int bins = kDefaultBins);

double mce(const ProbabilityMatrix& p, const LabelVector& y, int bins = kDefaultBins);

double brier(const ProbabilityMatrix& p, const LabelVector& y);
/// True-class probabilities below `floor` count as `floor`.
double log_loss(const ProbabilityMatrix& p, const LabelVector& y,
                double floor = kDefaultClipFloor);
double accuracy(const ProbabilityMatrix& p, const LabelVector& y);

/// Rows are true classes, columns argmax predictions.
Eigen::MatrixXi confusion_matrix(const ProbabilityMatrix& p, const LabelVector& y);
Eigen::MatrixXi confusion_delta(const Eigen::MatrixXi& before, const Eigen::MatrixXi& after);

struct EvalReport {
  double accuracy = 0.0;
  double error_rate = 0.0;
  double log_loss = 0.0;
  double brier = 0.0;
  double conf_ece = 0.0;
  double cw_ece = 0.0;
  Vector per_class_ece;
  double mce = 0.0;
  std::optional<double> p_conf_ece;
  std::optional<double> p_cw_ece;
};

/// Everything except the p-values, which come from the stattest module.
EvalReport evaluate(const ProbabilityMatrix& p, const LabelVector& y, int bins = kDefaultBins,
                    double floor = kDefaultClipFloor);

}  // namespace dircal::metrics
