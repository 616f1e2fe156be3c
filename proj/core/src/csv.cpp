#include "dircal/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace dircal {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<int> column_index(const std::string& name, const std::string& prefix) {
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) {
    return std::nullopt;
  }
  int value = 0;
  const char* first = name.data() + prefix.size();
  const char* last = name.data() + name.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value < 0) return std::nullopt;
  if (*first == '0' && last - first > 1) return std::nullopt;
  return value;
}

double parse_cell(const std::string& cell, std::size_t line) {
  std::string_view s = cell;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ": '" + cell + "' is not a finite number");
  }
  return v;
}

std::optional<int> parse_int(const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

PredictionTable read_predictions(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    header = split(line);
    break;
  }
  if (header.empty()) throw ParseError("empty prediction file");

  std::map<int, std::size_t> prob_cols;
  std::map<int, std::size_t> logit_cols;
  std::optional<std::size_t> label_col;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (!seen.insert(name).second) throw ParseError("duplicate column '" + name + "'");
    if (name == "label") {
      label_col = c;
    } else if (auto j = column_index(name, "p_")) {
      prob_cols[*j] = c;
    } else if (auto j = column_index(name, "z_")) {
      logit_cols[*j] = c;
    }
  }
  if (!prob_cols.empty() && !logit_cols.empty()) {
    throw ParseError("file mixes probability (p_*) and logit (z_*) columns");
  }
  if (prob_cols.empty() && logit_cols.empty()) {
    throw ParseError("no p_0.. or z_0.. columns in header");
  }
  PredictionTable table;
  table.kind = prob_cols.empty() ? InputKind::kLogits : InputKind::kProbabilities;
  const auto& cols = prob_cols.empty() ? logit_cols : prob_cols;
  const int k = static_cast<int>(cols.size());
  if (cols.rbegin()->first != k - 1) {
    throw ParseError("prediction columns must be numbered 0..k-1 without gaps");
  }
  if (k < 2) throw ParseError("at least two prediction columns are required");

  std::vector<double> values;
  std::vector<std::string> labels;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    for (const auto& [j, c] : cols) values.push_back(parse_cell(cells[c], line_no));
    if (label_col) {
      if (cells[*label_col].empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": empty label");
      }
      labels.push_back(cells[*label_col]);
    }
    ++n;
  }
  if (n == 0) throw ParseError("prediction file has no data rows");

  table.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(values.data(),
                                                                  static_cast<Index>(n), k);
  if (table.kind == InputKind::kProbabilities) {
    for (Index i = 0; i < table.values.rows(); ++i) {
      if ((table.values.row(i).array() < 0.0).any()) {
        throw InvalidInput("row " + std::to_string(i + 1) + ": negative probability");
      }
      const double s = table.values.row(i).sum();
      if (std::abs(s - 1.0) > kCsvRowSumTolerance) {
        throw InvalidInput("row " + std::to_string(i + 1) + ": probabilities sum to " +
                           format_double(s));
      }
      table.values.row(i) /= s;
    }
  }
  if (label_col) table.labels = std::move(labels);
  return table;
}

PredictionTable read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path.string() + "'");
  return read_predictions(in);
}

std::vector<std::string> infer_label_names(const std::vector<std::string>& raw, int k,
                                           const std::vector<std::string>& explicit_names) {
  if (!explicit_names.empty()) {
    if (explicit_names.size() != static_cast<std::size_t>(k)) {
      throw InvalidInput("label list has " + std::to_string(explicit_names.size()) +
                         " names for " + std::to_string(k) + " classes");
    }
    if (std::set<std::string>(explicit_names.begin(), explicit_names.end()).size() !=
        explicit_names.size()) {
      throw InvalidInput("label list has duplicate names");
    }
    return explicit_names;
  }
  std::vector<int> ints;
  bool all_int = true;
  for (const auto& r : raw) {
    const auto v = parse_int(r);
    if (!v) {
      all_int = false;
      break;
    }
    ints.push_back(*v);
  }
  auto numbered = [k](int base) {
    std::vector<std::string> out;
    for (int j = 0; j < k; ++j) out.push_back(std::to_string(j + base));
    return out;
  };
  if (all_int && !ints.empty()) {
    const auto [lo, hi] = std::minmax_element(ints.begin(), ints.end());
    if (*lo >= 0 && *hi < k) return numbered(0);
    if (*lo >= 1 && *hi <= k) return numbered(1);
  }
  const std::set<std::string> distinct(raw.begin(), raw.end());
  if (distinct.size() == static_cast<std::size_t>(k)) {
    return {distinct.begin(), distinct.end()};
  }
  throw InvalidInput("cannot map labels onto " + std::to_string(k) +
                     " classes; pass the class names explicitly");
}

LabelVector encode_labels(const std::vector<std::string>& raw,
                          const std::vector<std::string>& names) {
  std::map<std::string, int> index;
  for (std::size_t j = 0; j < names.size(); ++j) index[names[j]] = static_cast<int>(j);
  std::vector<int> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto it = index.find(raw[i]);
    if (it == index.end()) {
      throw InvalidInput("row " + std::to_string(i + 1) + ": unknown label '" + raw[i] + "'");
    }
    out.push_back(it->second);
  }
  return LabelVector(std::move(out), static_cast<int>(names.size()));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_probabilities(std::ostream& out, const ProbabilityMatrix& p,
                         const std::optional<std::vector<std::string>>& labels) {
  if (labels && labels->size() != static_cast<std::size_t>(p.rows())) {
    throw InvalidInput("label count differs from prediction rows");
  }
  for (Index j = 0; j < p.classes(); ++j) out << (j ? "," : "") << "p_" << j;
  if (labels) out << ",label";
  out << '\n';
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.classes(); ++j) {
      out << (j ? "," : "") << format_double(p.values()(i, j));
    }
    if (labels) out << ',' << (*labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

}  // namespace dircal
