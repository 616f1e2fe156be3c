#include "dircal/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace dircal::metrics {
namespace {

void check_pair(const ProbabilityMatrix& p, const LabelVector& y, int bins) {
  if (p.rows() != static_cast<Index>(y.size())) {
    throw InvalidInput("metrics: prediction rows and label count differ");
  }
  if (p.classes() != y.classes()) {
    throw InvalidInput("metrics: class counts of predictions and labels differ");
  }
  if (bins < 1) throw InvalidInput("metrics: bin count must be at least 1");
}

double edge(int i, int bins) { return static_cast<double>(i) / static_cast<double>(bins); }

// Accumulates (predicted, outcome) pairs into equal-width bins.
class BinAccumulator {
 public:
  BinAccumulator(int bins, ReliabilityMode mode, int cls)
      : sums_(static_cast<std::size_t>(bins), 0.0), hits_(static_cast<std::size_t>(bins), 0.0) {
    out_.mode = mode;
    out_.cls = cls;
    out_.bins.resize(static_cast<std::size_t>(bins));
    for (int i = 0; i < bins; ++i) {
      out_.bins[static_cast<std::size_t>(i)].low = edge(i, bins);
      out_.bins[static_cast<std::size_t>(i)].high = edge(i + 1, bins);
    }
  }

  void add(double predicted, bool outcome) {
    const auto b = static_cast<std::size_t>(bin_index(predicted, static_cast<int>(sums_.size())));
    sums_[b] += predicted;
    hits_[b] += outcome ? 1.0 : 0.0;
    ++out_.bins[b].count;
    ++out_.total;
  }

  ReliabilityBins finish() {
    for (std::size_t b = 0; b < sums_.size(); ++b) {
      ReliabilityBin& bin = out_.bins[b];
      if (bin.count == 0) continue;
      bin.mean_predicted = sums_[b] / static_cast<double>(bin.count);
      bin.empirical_frequency = hits_[b] / static_cast<double>(bin.count);
    }
    return std::move(out_);
  }

 private:
  std::vector<double> sums_;
  std::vector<double> hits_;
  ReliabilityBins out_;
};

}  // namespace

double ReliabilityBins::ece() const {
  if (total == 0) return 0.0;
  double acc = 0.0;
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    acc += static_cast<double>(b.count) * std::abs(b.empirical_frequency - b.mean_predicted);
  }
  return acc / static_cast<double>(total);
}

double ReliabilityBins::max_gap() const {
  double worst = 0.0;
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    worst = std::max(worst, std::abs(b.empirical_frequency - b.mean_predicted));
  }
  return worst;
}

int bin_index(double value, int bins) {
  value = std::clamp(value, 0.0, 1.0);
  int b = std::clamp(static_cast<int>(std::floor(value * bins)), 0, bins - 1);
  // value * bins can round across an edge; settle against the edges themselves.
  while (b < bins - 1 && value >= edge(b + 1, bins)) ++b;
  while (b > 0 && value < edge(b, bins)) --b;
  return b;
}

ReliabilityBins confidence_reliability(const ProbabilityMatrix& p, const LabelVector& y,
                                       int bins) {
  check_pair(p, y, bins);
  BinAccumulator acc(bins, ReliabilityMode::kConfidence, -1);
  for (Index i = 0; i < p.rows(); ++i) {
    const Index pred = argmax(p.row(i));
    acc.add(p.row(i)(pred), pred == y[static_cast<std::size_t>(i)]);
  }
  return acc.finish();
}

ReliabilityBins classwise_reliability(const ProbabilityMatrix& p, const LabelVector& y, int cls,
                                      int bins) {
  check_pair(p, y, bins);
  if (cls < 0 || cls >= p.classes()) throw InvalidInput("classwise reliability: class out of range");
  BinAccumulator acc(bins, ReliabilityMode::kClasswise, cls);
  for (Index i = 0; i < p.rows(); ++i) {
    acc.add(p.values()(i, cls), y[static_cast<std::size_t>(i)] == cls);
  }
  return acc.finish();
}

double confidence_ece(const ProbabilityMatrix& p, const LabelVector& y, int bins) {
  return confidence_reliability(p, y, bins).ece();
}

ClasswiseEce classwise_ece(const ProbabilityMatrix& p, const LabelVector& y, int bins) {
  check_pair(p, y, bins);
  ClasswiseEce out;
  out.per_class.resize(p.classes());
  for (Index j = 0; j < p.classes(); ++j) {
    out.per_class(j) = classwise_reliability(p, y, static_cast<int>(j), bins).ece();
  }
  out.cw_ece = out.per_class.mean();
  return out;
}

double mce(const ProbabilityMatrix& p, const LabelVector& y, int bins) {
  return confidence_reliability(p, y, bins).max_gap();
}

double brier(const ProbabilityMatrix& p, const LabelVector& y) {
  check_pair(p, y, 1);
  if (p.rows() == 0) throw InvalidInput("brier: no rows");
  double total = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    Eigen::RowVectorXd diff = p.row(i);
    diff(y[static_cast<std::size_t>(i)]) -= 1.0;
    total += diff.squaredNorm();
  }
  return total / static_cast<double>(p.rows());
}

double log_loss(const ProbabilityMatrix& p, const LabelVector& y, double floor) {
  check_pair(p, y, 1);
  if (p.rows() == 0) throw InvalidInput("log_loss: no rows");
  if (!(floor > 0.0)) throw InvalidInput("log_loss: clip floor must be positive");
  double total = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    total -= std::log(std::max(p.values()(i, y[static_cast<std::size_t>(i)]), floor));
  }
  return total / static_cast<double>(p.rows());
}

double accuracy(const ProbabilityMatrix& p, const LabelVector& y) {
  check_pair(p, y, 1);
  if (p.rows() == 0) throw InvalidInput("accuracy: no rows");
  std::size_t hits = 0;
  for (Index i = 0; i < p.rows(); ++i) {
    if (argmax(p.row(i)) == y[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(p.rows());
}

Eigen::MatrixXi confusion_matrix(const ProbabilityMatrix& p, const LabelVector& y) {
  check_pair(p, y, 1);
  Eigen::MatrixXi out = Eigen::MatrixXi::Zero(p.classes(), p.classes());
  for (Index i = 0; i < p.rows(); ++i) {
    ++out(y[static_cast<std::size_t>(i)], argmax(p.row(i)));
  }
  return out;
}

Eigen::MatrixXi confusion_delta(const Eigen::MatrixXi& before, const Eigen::MatrixXi& after) {
  if (before.rows() != after.rows() || before.cols() != after.cols()) {
    throw InvalidInput("confusion delta: shape mismatch");
  }
  return after - before;
}

EvalReport evaluate(const ProbabilityMatrix& p, const LabelVector& y, int bins, double floor) {
  EvalReport r;
  r.accuracy = accuracy(p, y);
  r.error_rate = 1.0 - r.accuracy;
  r.log_loss = log_loss(p, y, floor);
  r.brier = brier(p, y);
  const auto conf = confidence_reliability(p, y, bins);
  r.conf_ece = conf.ece();
  r.mce = conf.max_gap();
  auto cw = classwise_ece(p, y, bins);
  r.cw_ece = cw.cw_ece;
  r.per_class_ece = std::move(cw.per_class);
  return r;
}

}  // namespace dircal::metrics
