#pragma once

// Hyperparameter search by inner cross-validation with fold ensembling, and
// the repeated outer cross-validation used to compare calibration methods.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dircal/core.hpp"
#include "dircal/metrics.hpp"
#include "dircal/model.hpp"
#include "dircal/optim.hpp"
#include "dircal/stattest.hpp"

namespace dircal {

struct HyperGrid {
  std::vector<double> lambdas;
  /// Empty: mu follows lambda for ODIR methods and is 0 for vector scaling.
  std::vector<double> mus;
  std::vector<int> bins;
};

/// lambda 1e-7 .. 1e2 in decades, tied mu, bins {5, 10, 15, 20, 25, 30}.
HyperGrid default_grid();

/// Candidates relevant to `method`, each starting from `base`. Methods with
/// nothing to tune yield `base` alone. Throws InvalidInput on an empty axis.
std::vector<Hyperparameters> expand_grid(Method method, const HyperGrid& grid,
                                         const Hyperparameters& base);

/// Fold id per row, 0..folds-1, stratified by label and shuffled by `seed`.
std::vector<int> stratified_folds(const LabelVector& labels, int folds, std::uint64_t seed);

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);

struct CvFit {
  EnsembleModel model;
  Hyperparameters chosen;
  /// Mean held-out log-loss per candidate; +inf when a fold failed to fit.
  std::vector<double> candidate_scores;
};

/// folds <= 1: one model on all rows at the first candidate. Otherwise each
/// candidate is fitted on every fold complement, the candidate with the
/// lowest mean held-out log-loss wins (first on ties) and its per-fold
/// models form the ensemble. Throws FitError when no candidate fits.
CvFit fit_with_cv(Method method, const Matrix& input, InputKind kind, const LabelVector& labels,
                  std::span<const Hyperparameters> candidates, int folds, std::uint64_t seed,
                  const optim::Options& options = {});

struct CompareOptions {
  std::vector<Method> methods;
  std::optional<HyperGrid> grid;  // fixed hyperparameters when unset
  Hyperparameters base;
  int repeats = 5;
  int folds = 5;
  int inner_folds = 3;
  std::uint64_t seed = 0;
  int bins = metrics::kDefaultBins;
  std::size_t resamples = stattest::kDefaultResamples;
  double alpha = stattest::kDefaultAlpha;
};

struct MethodSummary {
  Method method = Method::kUncalibrated;
  std::size_t evaluated_folds = 0;
  std::size_t failed_folds = 0;
  double accuracy = 0.0;
  double error_rate = 0.0;
  double log_loss = 0.0;
  double brier = 0.0;
  double conf_ece = 0.0;
  double cw_ece = 0.0;
  double mce = 0.0;
  /// Share of outer test folds where the calibration test does not reject.
  double p_conf_ece = 0.0;
  double p_cw_ece = 0.0;
};

/// Repeated stratified outer cross-validation. Each method is fitted on the
/// outer training part with inner-CV ensembling and scored on the outer test
/// part; measures are averaged over folds that fitted successfully.
std::vector<MethodSummary> compare(const Matrix& input, InputKind kind, const LabelVector& labels,
                                   const CompareOptions& options,
                                   const optim::Options& optim_options = {});

}  // namespace dircal
