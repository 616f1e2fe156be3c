#include "dircal/harness.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "dircal/rng.hpp"

namespace dircal {
namespace {

constexpr std::uint64_t kOuterStream = 1;
constexpr std::uint64_t kInnerStream = 2;
constexpr std::uint64_t kConfTestStream = 3;
constexpr std::uint64_t kCwTestStream = 4;

bool tunes_lambda(Method m) {
  return m == Method::kDirichletL2 || m == Method::kDirichletOdir || m == Method::kMatrixOdir ||
         m == Method::kMatrixOdirZero;
}

bool tunes_mu(Method m) {
  return m == Method::kDirichletOdir || m == Method::kMatrixOdir ||
         m == Method::kMatrixOdirZero || m == Method::kVectorScaling;
}

bool tunes_bins(Method m) { return m == Method::kOvrWidthBin || m == Method::kOvrFreqBin; }

std::vector<std::size_t> rows_where(const std::vector<int>& fold_of, int fold, bool equal) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if ((fold_of[i] == fold) == equal) out.push_back(i);
  }
  return out;
}

}  // namespace

HyperGrid default_grid() {
  HyperGrid g;
  for (int e = -7; e <= 2; ++e) g.lambdas.push_back(std::pow(10.0, e));
  g.bins = {5, 10, 15, 20, 25, 30};
  return g;
}

std::vector<Hyperparameters> expand_grid(Method method, const HyperGrid& grid,
                                         const Hyperparameters& base) {
  std::vector<Hyperparameters> out;
  if (tunes_bins(method)) {
    if (grid.bins.empty()) throw InvalidInput("bin grid is empty");
    for (int m : grid.bins) {
      Hyperparameters h = base;
      h.cal_bins = m;
      out.push_back(h);
    }
    return out;
  }
  std::vector<std::optional<double>> mus{base.mu};
  if (tunes_mu(method) && !grid.mus.empty()) mus.assign(grid.mus.begin(), grid.mus.end());
  if (tunes_lambda(method)) {
    if (grid.lambdas.empty()) throw InvalidInput("lambda grid is empty");
    for (double l : grid.lambdas) {
      for (const auto& mu : mus) {
        Hyperparameters h = base;
        h.lambda = l;
        h.mu = mu;
        out.push_back(h);
      }
    }
    return out;
  }
  for (const auto& mu : mus) {
    Hyperparameters h = base;
    h.mu = mu;
    out.push_back(h);
  }
  return out;
}

std::vector<int> stratified_folds(const LabelVector& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidInput("fold count must be at least 2");
  if (labels.size() < static_cast<std::size_t>(folds)) {
    throw InvalidInput("fewer rows (" + std::to_string(labels.size()) + ") than folds (" +
                       std::to_string(folds) + ")");
  }
  std::vector<int> fold_of(labels.size(), 0);
  std::size_t dealt = 0;
  for (int c = 0; c < labels.classes(); ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) rows.push_back(i);
    }
    rng::Stream stream(seed, static_cast<std::uint64_t>(c));
    for (std::size_t i = rows.size(); i > 1; --i) {
      std::swap(rows[i - 1], rows[stream.next_below(i)]);
    }
    for (std::size_t r : rows) fold_of[r] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(static_cast<Index>(rows[i]));
  return out;
}

CvFit fit_with_cv(Method method, const Matrix& input, InputKind kind, const LabelVector& labels,
                  std::span<const Hyperparameters> candidates, int folds, std::uint64_t seed,
                  const optim::Options& options) {
  if (candidates.empty()) throw InvalidInput("no hyperparameter candidates");
  if (input.rows() != static_cast<Index>(labels.size())) {
    throw InvalidInput("label count differs from input rows");
  }
  CvFit out;
  if (folds <= 1) {
    out.chosen = candidates.front();
    out.model.members.push_back(
        fit_calibrator(method, input, kind, labels, out.chosen, seed, options));
    return out;
  }

  const auto fold_of = stratified_folds(labels, folds, seed);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& hyper : candidates) {
    std::vector<CalibratorModel> members;
    double total = 0.0;
    for (int f = 0; f < folds && std::isfinite(total); ++f) {
      const auto train = rows_where(fold_of, f, false);
      const auto held = rows_where(fold_of, f, true);
      try {
        auto m = fit_calibrator(method, select_rows(input, train), kind, labels.subset(train),
                                hyper, seed, options);
        const ProbabilityMatrix pred = m.apply(select_rows(input, held));
        total += metrics::log_loss(pred, labels.subset(held), hyper.clip_floor);
        members.push_back(std::move(m));
      } catch (const InvalidInput&) {
        total = std::numeric_limits<double>::infinity();
      } catch (const FitError&) {
        total = std::numeric_limits<double>::infinity();
      } catch (const DomainError&) {
        total = std::numeric_limits<double>::infinity();
      }
    }
    const double score = total / folds;
    out.candidate_scores.push_back(score);
    if (score < best) {
      best = score;
      out.chosen = hyper;
      out.model.members = std::move(members);
    }
  }
  if (!std::isfinite(best)) {
    throw FitError(method_name(method) + ": no hyperparameter candidate fitted on every fold");
  }
  return out;
}

std::vector<MethodSummary> compare(const Matrix& input, InputKind kind, const LabelVector& labels,
                                   const CompareOptions& options,
                                   const optim::Options& optim_options) {
  if (options.methods.empty()) throw InvalidInput("compare: no methods given");
  for (Method m : options.methods) {
    if (method_requires_logits(m) && kind != InputKind::kLogits) {
      throw InvalidInput("compare: " + method_name(m) + " requires logit input");
    }
  }
  if (options.repeats < 1) throw InvalidInput("compare: repeats must be at least 1");
  if (options.folds < 2) throw InvalidInput("compare: outer folds must be at least 2");
  if (options.inner_folds < 1) throw InvalidInput("compare: inner folds must be at least 1");
  if (input.rows() != static_cast<Index>(labels.size())) {
    throw InvalidInput("compare: label count differs from input rows");
  }
  const auto n = labels.size();
  const auto min_train = n - (n + static_cast<std::size_t>(options.folds) - 1) /
                                 static_cast<std::size_t>(options.folds);
  if (n < static_cast<std::size_t>(options.folds) ||
      min_train < static_cast<std::size_t>(std::max(options.inner_folds, 2))) {
    throw InvalidInput("compare: " + std::to_string(n) + " rows cannot support " +
                       std::to_string(options.folds) + " outer and " +
                       std::to_string(options.inner_folds) + " inner folds");
  }

  std::vector<MethodSummary> out(options.methods.size());
  std::vector<std::vector<stattest::TestResult>> conf_tests(options.methods.size());
  std::vector<std::vector<stattest::TestResult>> cw_tests(options.methods.size());
  for (std::size_t mi = 0; mi < options.methods.size(); ++mi) out[mi].method = options.methods[mi];

  for (int r = 0; r < options.repeats; ++r) {
    const auto fold_of = stratified_folds(
        labels, options.folds, rng::hash(options.seed, kOuterStream, static_cast<std::uint64_t>(r)));
    for (int f = 0; f < options.folds; ++f) {
      const auto cell = static_cast<std::uint64_t>(r * options.folds + f);
      const auto train = rows_where(fold_of, f, false);
      const auto test = rows_where(fold_of, f, true);
      const Matrix train_x = select_rows(input, train);
      const Matrix test_x = select_rows(input, test);
      const LabelVector train_y = labels.subset(train);
      const LabelVector test_y = labels.subset(test);
      for (std::size_t mi = 0; mi < options.methods.size(); ++mi) {
        const Method method = options.methods[mi];
        MethodSummary& s = out[mi];
        try {
          const auto candidates = options.grid ? expand_grid(method, *options.grid, options.base)
                                               : std::vector<Hyperparameters>{options.base};
          const CvFit fitted =
              fit_with_cv(method, train_x, kind, train_y, candidates, options.inner_folds,
                          rng::hash(options.seed, kInnerStream, cell), optim_options);
          const ProbabilityMatrix pred = fitted.model.apply(test_x);
          const auto report =
              metrics::evaluate(pred, test_y, options.bins, options.base.clip_floor);
          stattest::Options test_opt;
          test_opt.bins = options.bins;
          test_opt.resamples = options.resamples;
          test_opt.statistic = stattest::Statistic::kConfidenceEce;
          test_opt.seed = rng::hash(options.seed, kConfTestStream, cell);
          auto conf = stattest::calibration_test(pred, test_y, test_opt);
          test_opt.statistic = stattest::Statistic::kClasswiseEce;
          test_opt.seed = rng::hash(options.seed, kCwTestStream, cell);
          auto cw = stattest::calibration_test(pred, test_y, test_opt);

          s.accuracy += report.accuracy;
          s.error_rate += report.error_rate;
          s.log_loss += report.log_loss;
          s.brier += report.brier;
          s.conf_ece += report.conf_ece;
          s.cw_ece += report.cw_ece;
          s.mce += report.mce;
          conf.resampled_statistics = {};
          cw.resampled_statistics = {};
          conf_tests[mi].push_back(std::move(conf));
          cw_tests[mi].push_back(std::move(cw));
          ++s.evaluated_folds;
        } catch (const InvalidInput&) {
          ++s.failed_folds;
        } catch (const FitError&) {
          ++s.failed_folds;
        } catch (const DomainError&) {
          ++s.failed_folds;
        }
      }
    }
  }

  for (std::size_t mi = 0; mi < out.size(); ++mi) {
    MethodSummary& s = out[mi];
    if (s.evaluated_folds == 0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      s.accuracy = s.error_rate = s.log_loss = s.brier = nan;
      s.conf_ece = s.cw_ece = s.mce = s.p_conf_ece = s.p_cw_ece = nan;
      continue;
    }
    const auto cnt = static_cast<double>(s.evaluated_folds);
    s.accuracy /= cnt;
    s.error_rate /= cnt;
    s.log_loss /= cnt;
    s.brier /= cnt;
    s.conf_ece /= cnt;
    s.cw_ece /= cnt;
    s.mce /= cnt;
    s.p_conf_ece = stattest::acceptance_rate(conf_tests[mi], options.alpha);
    s.p_cw_ece = stattest::acceptance_rate(cw_tests[mi], options.alpha);
  }
  return out;
}

}  // namespace dircal
