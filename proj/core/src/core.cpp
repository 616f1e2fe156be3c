#include "dircal/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace dircal {

ProbabilityMatrix::ProbabilityMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.cols() < 2) {
    throw InvalidInput("probability matrix needs at least 2 classes");
  }
  for (Index i = 0; i < values_.rows(); ++i) {
    double sum = 0.0;
    for (Index j = 0; j < values_.cols(); ++j) {
      const double v = values_(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw InvalidInput("probability entry outside [0,1] at row " + std::to_string(i));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw InvalidInput("probability row " + std::to_string(i) + " does not sum to 1");
    }
  }
}

LogitMatrix::LogitMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.cols() < 2) {
    throw InvalidInput("logit matrix needs at least 2 classes");
  }
  if (!values_.allFinite()) {
    throw InvalidInput("logit matrix has non-finite entries");
  }
}

LabelVector::LabelVector(std::vector<int> labels, int classes)
    : labels_(std::move(labels)), classes_(classes) {
  if (classes_ < 2) {
    throw InvalidInput("label vector needs at least 2 classes");
  }
  for (int y : labels_) {
    if (y < 0 || y >= classes_) {
      throw InvalidInput("label " + std::to_string(y) + " out of range for " +
                         std::to_string(classes_) + " classes");
    }
  }
}

int LabelVector::distinct_count() const {
  std::vector<bool> seen(static_cast<std::size_t>(classes_), false);
  int count = 0;
  for (int y : labels_) {
    if (!seen[static_cast<std::size_t>(y)]) {
      seen[static_cast<std::size_t>(y)] = true;
      ++count;
    }
  }
  return count;
}

LabelVector LabelVector::subset(std::span<const std::size_t> rows) const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(labels_.at(r));
  return LabelVector(std::move(out), classes_);
}

Vector softmax(const Eigen::Ref<const Vector>& v) {
  if (!v.allFinite()) {
    throw InvalidInput("softmax: non-finite input");
  }
  const double shift = v.maxCoeff();
  Vector e = (v.array() - shift).exp();
  return e / e.sum();
}

ProbabilityMatrix softmax_rows(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (Index i = 0; i < scores.rows(); ++i) {
    out.row(i) = softmax(scores.row(i).transpose()).transpose();
  }
  return ProbabilityMatrix(std::move(out));
}

Vector clip_row(const Eigen::Ref<const Vector>& row, double floor) {
  const Index k = row.size();
  if (!(floor > 0.0) || !(floor < 1.0 / static_cast<double>(k))) {
    throw InvalidInput("clip floor must lie in (0, 1/k)");
  }
  if (!row.allFinite()) {
    throw InvalidInput("clip: non-finite probability");
  }
  Vector out = row;
  std::vector<bool> pinned(static_cast<std::size_t>(k), false);
  // Pinning an entry can push a rescaled neighbour under the floor, so repeat
  // until no new entry is pinned. Terminates within k passes since floor < 1/k.
  for (;;) {
    Index n_pinned = 0;
    double free_mass = 0.0;
    for (Index j = 0; j < k; ++j) {
      if (!pinned[j] && out(j) < floor) pinned[j] = true;
      if (pinned[j]) {
        ++n_pinned;
      } else {
        free_mass += out(j);
      }
    }
    if (!(free_mass > 0.0)) {
      throw InvalidInput("clip: row has no probability mass");
    }
    const double target = 1.0 - static_cast<double>(n_pinned) * floor;
    const double scale = target / free_mass;
    bool changed = false;
    for (Index j = 0; j < k; ++j) {
      if (pinned[j]) {
        out(j) = floor;
      } else {
        out(j) *= scale;
        if (out(j) < floor) changed = true;
      }
    }
    if (!changed) break;
  }
  return out;
}

ProbabilityMatrix clip_probabilities(const ProbabilityMatrix& p, double floor) {
  Matrix out(p.rows(), p.classes());
  for (Index i = 0; i < p.rows(); ++i) {
    out.row(i) = clip_row(p.row(i).transpose(), floor).transpose();
  }
  return ProbabilityMatrix(std::move(out));
}

Vector log_transform(const Eigen::Ref<const Vector>& q) {
  if ((q.array() <= 0.0).any()) {
    throw DomainError("log transform of a zero probability; clip the input first");
  }
  return q.array().log();
}

Matrix log_transform(const ProbabilityMatrix& p) {
  const Matrix& v = p.values();
  if ((v.array() <= 0.0).any()) {
    throw DomainError("log transform of a zero probability; clip the input first");
  }
  return v.array().log();
}

Index argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  Index best = 0;
  for (Index j = 1; j < row.size(); ++j) {
    if (row(j) > row(best)) best = j;
  }
  return best;
}

}  // namespace dircal
