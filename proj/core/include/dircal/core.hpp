#pragma once

// Simplex-valued data types and the transforms shared by every calibrator.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dircal/errors.hpp"

namespace dircal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Smallest positive double that survives the log transform in practice.
inline constexpr double kDefaultClipFloor = 2.2e-308;

/// Row-sum tolerance of ProbabilityMatrix.
inline constexpr double kSimplexTolerance = 1e-9;

/// n x k matrix whose rows are class-probability vectors.
class ProbabilityMatrix {
 public:
  /// Validates entries in [0,1], row sums within kSimplexTolerance and k >= 2.
  explicit ProbabilityMatrix(Matrix values);

  Index rows() const { return values_.rows(); }
  Index classes() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  auto row(Index i) const { return values_.row(i); }

 private:
  Matrix values_;
};

/// n x k matrix of unnormalized log-odds scores.
class LogitMatrix {
 public:
  explicit LogitMatrix(Matrix values);

  Index rows() const { return values_.rows(); }
  Index classes() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  auto row(Index i) const { return values_.row(i); }

 private:
  Matrix values_;
};

/// 0-based class indices, each below `classes`.
class LabelVector {
 public:
  LabelVector(std::vector<int> labels, int classes);

  std::size_t size() const { return labels_.size(); }
  int classes() const { return classes_; }
  int operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<int>& values() const { return labels_; }
  int distinct_count() const;
  /// Labels at the given row positions.
  LabelVector subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<int> labels_;
  int classes_;
};

/// Predictions paired with labels; at least two distinct labels present.
template <typename Predictions>
class CalibrationDataset {
 public:
  CalibrationDataset(Predictions predictions, LabelVector labels)
      : predictions_(std::move(predictions)), labels_(std::move(labels)) {
    if (predictions_.rows() != static_cast<Index>(labels_.size())) {
      throw InvalidInput("dataset: prediction rows and label count differ");
    }
    if (predictions_.classes() != labels_.classes()) {
      throw InvalidInput("dataset: class counts of predictions and labels differ");
    }
    if (labels_.distinct_count() < 2) {
      throw InvalidInput("dataset: at least two distinct labels are required");
    }
  }

  const Predictions& predictions() const { return predictions_; }
  const LabelVector& labels() const { return labels_; }
  Index rows() const { return predictions_.rows(); }
  Index classes() const { return predictions_.classes(); }

 private:
  Predictions predictions_;
  LabelVector labels_;
};

using ProbabilityDataset = CalibrationDataset<ProbabilityMatrix>;
using LogitDataset = CalibrationDataset<LogitMatrix>;

/// Overflow-safe softmax.
Vector softmax(const Eigen::Ref<const Vector>& v);
/// Row-wise softmax of an n x k score matrix.
ProbabilityMatrix softmax_rows(const Matrix& scores);

/// Raises entries below `floor` to `floor` and rescales the remaining entries
/// so the row sums to one. Entries at the floor stay at the floor.
Vector clip_row(const Eigen::Ref<const Vector>& row, double floor);
ProbabilityMatrix clip_probabilities(const ProbabilityMatrix& p, double floor = kDefaultClipFloor);

/// Element-wise natural log. Throws DomainError on a zero entry.
Matrix log_transform(const ProbabilityMatrix& p);
Vector log_transform(const Eigen::Ref<const Vector>& q);

/// Index of the largest entry, lowest index on ties.
Index argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row);

}  // namespace dircal
