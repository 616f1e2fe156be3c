#include "dircal/ovr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "multinomial.hpp"

namespace dircal::ovr {
namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidInput("binary calibrator: score and label counts differ");
  }
  if (scores.empty()) {
    throw InvalidInput("binary calibrator: no data");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidInput("binary calibrator: labels must be 0 or 1");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidInput("binary calibrator: non-finite score");
  }
}

double clamp_unit_open(double p) {
  constexpr double kUpper = 1.0 - 0x1.0p-53;
  return std::clamp(p, kDefaultClipFloor, kUpper);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Linear-interpolation empirical quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double IsotonicMap::predict(double score) const {
  if (breakpoints.empty()) throw InvalidInput("isotonic map is empty");
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), score);
  if (it == breakpoints.begin()) return values.front();
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

double BinningMap::predict(double score) const {
  if (bin_values.empty() || edges.size() != bin_values.size() + 1) {
    throw InvalidInput("binning map is malformed");
  }
  // Interior edges only: a score equal to an edge belongs to the upper bin.
  const auto first = edges.begin() + 1;
  const auto last = edges.end() - 1;
  const auto it = std::upper_bound(first, last, score);
  return bin_values[static_cast<std::size_t>(it - first)];
}

double BetaParams::predict(double p) const {
  p = clamp_unit_open(p);
  return sigmoid(a * std::log(p) - b * std::log1p(-p) + c);
}

double predict(const BinaryCalibrator& calibrator, double score) {
  return std::visit([score](const auto& m) { return m.predict(score); }, calibrator);
}

std::vector<double> pava(std::span<const double> y, std::span<const double> weights) {
  if (y.size() != weights.size()) throw InvalidInput("pava: value and weight counts differ");
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(weights[i] > 0.0)) throw InvalidInput("pava: weights must be positive");
    blocks.push_back({y[i], weights[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
      prev.weight = w;
      prev.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

IsotonicMap fit_isotonic(std::span<const double> scores, std::span<const int> labels) {
  check_binary(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Pool tied scores before running PAV.
  IsotonicMap out;
  std::vector<double> means, weights;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    double sum = 0.0;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == s) {
      sum += labels[order[j]];
      ++j;
    }
    out.breakpoints.push_back(s);
    means.push_back(sum / static_cast<double>(j - i));
    weights.push_back(static_cast<double>(j - i));
    i = j;
  }
  out.values = pava(means, weights);
  return out;
}

BinningMap fit_binning(std::span<const double> scores, std::span<const int> labels, int bins,
                       BinningScheme scheme) {
  if (bins < 1) throw InvalidInput("binning: bin count must be at least 1");
  check_binary(scores, labels);
  BinningMap out;
  out.scheme = scheme;
  out.edges.push_back(0.0);
  if (scheme == BinningScheme::kEqualWidth) {
    for (int i = 1; i < bins; ++i) out.edges.push_back(static_cast<double>(i) / bins);
  } else {
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    for (int i = 1; i < bins; ++i) {
      const double e = quantile(sorted, static_cast<double>(i) / bins);
      if (e > out.edges.back() && e < 1.0) out.edges.push_back(e);
    }
  }
  out.edges.push_back(1.0);

  const std::size_t m = out.edges.size() - 1;
  std::vector<double> sums(m, 0.0);
  std::vector<std::size_t> counts(m, 0);
  double total = 0.0;
  out.bin_values.assign(m, 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto it = std::upper_bound(out.edges.begin() + 1, out.edges.end() - 1, scores[i]);
    const auto bin = static_cast<std::size_t>(it - (out.edges.begin() + 1));
    sums[bin] += labels[i];
    ++counts[bin];
    total += labels[i];
  }
  const double base_rate = total / static_cast<double>(scores.size());
  for (std::size_t b = 0; b < m; ++b) {
    out.bin_values[b] = counts[b] > 0 ? sums[b] / static_cast<double>(counts[b]) : base_rate;
  }
  return out;
}

BetaParams fit_beta(std::span<const double> scores, std::span<const int> labels, double lambda) {
  check_binary(scores, labels);
  if (lambda < 0.0) throw InvalidInput("beta: lambda must be nonnegative");
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!has_pos || !has_neg) throw InvalidInput("beta: both labels must be present");

  // Column 0 is the positive class, column 1 the rest.
  const auto n = static_cast<Index>(scores.size());
  Matrix features(n, 2);
  std::vector<int> classes(scores.size());
  for (Index i = 0; i < n; ++i) {
    const double p = clamp_unit_open(scores[static_cast<std::size_t>(i)]);
    features(i, 0) = std::log(p);
    features(i, 1) = std::log1p(-p);
    classes[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)] == 1 ? 0 : 1;
  }
  const double weight = lambda / 6.0;  // mean over 4 weights and 2 intercepts
  detail::MultinomialProblem problem(std::move(features), std::move(classes),
                                     detail::WeightLayout::kFull, Matrix::Constant(2, 2, weight),
                                     Vector::Constant(2, weight));
  const auto result = detail::fit_multinomial(problem, optim::Options{});
  Matrix w;
  Vector b;
  problem.unpack(result.params, &w, &b);
  return BetaParams{w(0, 0) - w(1, 0), w(1, 1) - w(0, 1), b(0) - b(1)};
}

OneVsRestModel fit_ovr(const ProbabilityDataset& data, const OvrConfig& config) {
  const Index k = data.classes();
  const Matrix& p = data.predictions().values();
  OneVsRestModel model;
  model.per_class.reserve(static_cast<std::size_t>(k));
  std::vector<double> scores(static_cast<std::size_t>(data.rows()));
  std::vector<int> indicator(static_cast<std::size_t>(data.rows()));
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < data.rows(); ++i) {
      scores[static_cast<std::size_t>(i)] = p(i, j);
      indicator[static_cast<std::size_t>(i)] = data.labels()[static_cast<std::size_t>(i)] == j;
    }
    switch (config.kind) {
      case OvrKind::kIsotonic:
        model.per_class.emplace_back(fit_isotonic(scores, indicator));
        break;
      case OvrKind::kWidthBinning:
        model.per_class.emplace_back(
            fit_binning(scores, indicator, config.bins, BinningScheme::kEqualWidth));
        break;
      case OvrKind::kFrequencyBinning:
        model.per_class.emplace_back(
            fit_binning(scores, indicator, config.bins, BinningScheme::kEqualFrequency));
        break;
      case OvrKind::kBeta:
        model.per_class.emplace_back(fit_beta(scores, indicator, config.beta_lambda));
        break;
    }
  }
  return model;
}

Vector apply_ovr(const Eigen::Ref<const Vector>& q, const OneVsRestModel& model) {
  const Index k = model.classes();
  if (q.size() != k) throw InvalidInput("apply_ovr: class count mismatch");
  Vector out(k);
  for (Index j = 0; j < k; ++j) {
    out(j) = std::max(0.0, predict(model.per_class[static_cast<std::size_t>(j)], q(j)));
  }
  const double total = out.sum();
  if (!(total > 0.0)) return Vector::Constant(k, 1.0 / static_cast<double>(k));
  return out / total;
}

ProbabilityMatrix apply_ovr(const ProbabilityMatrix& q, const OneVsRestModel& model) {
  Matrix out(q.rows(), q.classes());
  for (Index i = 0; i < q.rows(); ++i) {
    out.row(i) = apply_ovr(q.row(i).transpose(), model).transpose();
  }
  return ProbabilityMatrix(std::move(out));
}

}  // namespace dircal::ovr
