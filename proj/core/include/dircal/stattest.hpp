#pragma once

// Resampling test of calibration: the statistic on the real labels is
// compared against its distribution under pseudo-labels drawn from the
// model's own predicted class distributions.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dircal/core.hpp"

namespace dircal::stattest {

enum class Statistic { kConfidenceEce, kClasswiseEce };

/// "conf_ece" or "cw_ece"; anything else is InvalidInput.
Statistic parse_statistic(const std::string& name);
std::string statistic_name(Statistic s);

inline constexpr std::size_t kDefaultResamples = 10000;
inline constexpr double kDefaultAlpha = 0.05;

struct Options {
  Statistic statistic = Statistic::kConfidenceEce;
  int bins = 15;
  std::size_t resamples = kDefaultResamples;
  std::uint64_t seed = 0;
  /// Report (count + 1) / (N + 1) instead of count / N.
  bool plus_one = false;
};

struct TestResult {
  double observed_statistic = 0.0;
  std::vector<double> resampled_statistics;
  double p_value = 0.0;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;
  std::size_t exceedances = 0;  // resampled strictly greater than observed
};

/// p-value arithmetic: resampled statistics strictly greater than the
/// observed one, over the number of resamples.
TestResult summarize(double observed, std::vector<double> resampled, std::uint64_t seed,
                     bool plus_one = false);

/// Pseudo-label of `row` in resample `r` is categorical(p_row) driven by the
/// counter-based generator at (seed, r, row).
TestResult calibration_test(const ProbabilityMatrix& p, const LabelVector& y,
                            const Options& options);

/// Fraction of results with p_value > alpha, i.e. tests not rejecting
/// calibration.
double acceptance_rate(std::span<const TestResult> results, double alpha = kDefaultAlpha);

}  // namespace dircal::stattest
