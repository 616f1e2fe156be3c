#pragma once

// Prediction tables on disk: a header row, then one row per instance.
// Probability columns are p_0..p_{k-1}, logit columns z_0..z_{k-1}; an
// optional `label` column carries the true class. Other columns are ignored.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dircal/core.hpp"
#include "dircal/model.hpp"

namespace dircal {

struct PredictionTable {
  Matrix values;
  InputKind kind = InputKind::kProbabilities;
  std::optional<std::vector<std::string>> labels;  // raw label cells

  Index rows() const { return values.rows(); }
  Index classes() const { return values.cols(); }
};

/// Probability rows whose sum is off by more than this are rejected;
/// smaller discrepancies are renormalized away.
inline constexpr double kCsvRowSumTolerance = 1e-3;

/// ParseError on malformed text; InvalidInput on probability rows that are
/// not distributions.
PredictionTable read_predictions(std::istream& in);
PredictionTable read_predictions(const std::filesystem::path& path);

/// Class names in column order. `explicit_names` wins when given; otherwise
/// 0-based integers, then 1-based integers, then the sorted distinct strings
/// when there are exactly k of them.
std::vector<std::string> infer_label_names(const std::vector<std::string>& raw, int k,
                                           const std::vector<std::string>& explicit_names = {});

/// InvalidInput for a label missing from `names`.
LabelVector encode_labels(const std::vector<std::string>& raw,
                          const std::vector<std::string>& names);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// Header p_0..p_{k-1}, plus `label` when labels are given.
void write_probabilities(std::ostream& out, const ProbabilityMatrix& p,
                         const std::optional<std::vector<std::string>>& labels = std::nullopt);

}  // namespace dircal
