#include "dircal/stattest.hpp"

#include <cmath>

#include "dircal/metrics.hpp"
#include "dircal/rng.hpp"

namespace dircal::stattest {
namespace {

// The binning of predictions is fixed across resamples; only the labels
// change. Each kernel precomputes bins once and then scores a label vector
// in O(n + k m).
class ConfidenceKernel {
 public:
  ConfidenceKernel(const ProbabilityMatrix& p, int bins)
      : n_(p.rows()), bin_(static_cast<std::size_t>(n_)), pred_(static_cast<std::size_t>(n_)),
        conf_sum_(static_cast<std::size_t>(bins), 0.0), hits_(static_cast<std::size_t>(bins)) {
    for (Index i = 0; i < n_; ++i) {
      const Index a = argmax(p.row(i));
      const double c = p.values()(i, a);
      const int b = metrics::bin_index(c, bins);
      bin_[static_cast<std::size_t>(i)] = b;
      pred_[static_cast<std::size_t>(i)] = static_cast<int>(a);
      conf_sum_[static_cast<std::size_t>(b)] += c;
    }
  }

  template <typename LabelAt>
  double operator()(LabelAt label_at) {
    std::fill(hits_.begin(), hits_.end(), 0.0);
    for (Index i = 0; i < n_; ++i) {
      const auto r = static_cast<std::size_t>(i);
      if (label_at(i) == pred_[r]) hits_[static_cast<std::size_t>(bin_[r])] += 1.0;
    }
    double total = 0.0;
    for (std::size_t b = 0; b < hits_.size(); ++b) total += std::abs(hits_[b] - conf_sum_[b]);
    return total / static_cast<double>(n_);
  }

 private:
  Index n_;
  std::vector<int> bin_;
  std::vector<int> pred_;
  std::vector<double> conf_sum_;
  std::vector<double> hits_;
};

class ClasswiseKernel {
 public:
  ClasswiseKernel(const ProbabilityMatrix& p, int bins)
      : n_(p.rows()), k_(p.classes()), bins_(bins),
        bin_(static_cast<std::size_t>(n_ * k_)),
        prob_sum_(static_cast<std::size_t>(k_ * bins), 0.0),
        hits_(static_cast<std::size_t>(k_ * bins)) {
    for (Index i = 0; i < n_; ++i) {
      for (Index j = 0; j < k_; ++j) {
        const double v = p.values()(i, j);
        const int b = metrics::bin_index(v, bins);
        bin_[static_cast<std::size_t>(i * k_ + j)] = b;
        prob_sum_[static_cast<std::size_t>(j * bins + b)] += v;
      }
    }
  }

  template <typename LabelAt>
  double operator()(LabelAt label_at) {
    std::fill(hits_.begin(), hits_.end(), 0.0);
    for (Index i = 0; i < n_; ++i) {
      const int y = label_at(i);
      const int b = bin_[static_cast<std::size_t>(i * k_ + y)];
      hits_[static_cast<std::size_t>(y * bins_ + b)] += 1.0;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < hits_.size(); ++c) total += std::abs(hits_[c] - prob_sum_[c]);
    return total / static_cast<double>(n_) / static_cast<double>(k_);
  }

 private:
  Index n_;
  Index k_;
  int bins_;
  std::vector<int> bin_;
  std::vector<double> prob_sum_;
  std::vector<double> hits_;
};

template <typename Kernel>
TestResult run(Kernel kernel, const ProbabilityMatrix& p, const LabelVector& y,
               const Options& options) {
  const double observed =
      kernel([&](Index i) { return y[static_cast<std::size_t>(i)]; });
  std::vector<double> resampled;
  resampled.reserve(options.resamples);
  for (std::size_t r = 0; r < options.resamples; ++r) {
    resampled.push_back(kernel([&](Index i) {
      return rng::categorical(p.row(i), rng::uniform(options.seed, r, static_cast<std::uint64_t>(i)));
    }));
  }
  return summarize(observed, std::move(resampled), options.seed, options.plus_one);
}

}  // namespace

Statistic parse_statistic(const std::string& name) {
  if (name == "conf_ece") return Statistic::kConfidenceEce;
  if (name == "cw_ece") return Statistic::kClasswiseEce;
  throw InvalidInput("unknown test statistic '" + name + "' (expected conf_ece or cw_ece)");
}

std::string statistic_name(Statistic s) {
  return s == Statistic::kConfidenceEce ? "conf_ece" : "cw_ece";
}

TestResult summarize(double observed, std::vector<double> resampled, std::uint64_t seed,
                     bool plus_one) {
  if (resampled.empty()) throw InvalidInput("calibration test needs at least one resample");
  TestResult out;
  out.observed_statistic = observed;
  out.n_resamples = resampled.size();
  out.seed = seed;
  for (double s : resampled) {
    if (s > observed) ++out.exceedances;
  }
  const auto n = static_cast<double>(out.n_resamples);
  out.p_value = plus_one ? (static_cast<double>(out.exceedances) + 1.0) / (n + 1.0)
                         : static_cast<double>(out.exceedances) / n;
  out.resampled_statistics = std::move(resampled);
  return out;
}

TestResult calibration_test(const ProbabilityMatrix& p, const LabelVector& y,
                            const Options& options) {
  if (options.resamples < 1) throw InvalidInput("calibration test needs at least one resample");
  if (options.bins < 1) throw InvalidInput("calibration test: bin count must be at least 1");
  if (p.rows() != static_cast<Index>(y.size()) || p.classes() != y.classes()) {
    throw InvalidInput("calibration test: predictions and labels do not match");
  }
  if (p.rows() == 0) throw InvalidInput("calibration test: no rows");
  if (options.statistic == Statistic::kConfidenceEce) {
    return run(ConfidenceKernel(p, options.bins), p, y, options);
  }
  return run(ClasswiseKernel(p, options.bins), p, y, options);
}

double acceptance_rate(std::span<const TestResult> results, double alpha) {
  if (results.empty()) throw InvalidInput("acceptance rate of no tests");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  std::size_t accepted = 0;
  for (const auto& r : results) {
    if (r.p_value > alpha) ++accepted;
  }
  return static_cast<double>(accepted) / static_cast<double>(results.size());
}

}  // namespace dircal::stattest
