#pragma once

// Flat key/value records and their text, JSON-lines and CSV renderings,
// plus the record layouts of each report the command line prints.

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "dircal/harness.hpp"
#include "dircal/metrics.hpp"
#include "dircal/model.hpp"
#include "dircal/stattest.hpp"

namespace dircal::report {

enum class OutputFormat { kText, kJsonLines, kCsv };

/// "text", "json-lines" or "csv".
OutputFormat parse_format(const std::string& name);

using Value = std::variant<std::string, double, long long, bool, std::vector<double>>;

struct Field {
  std::string key;
  Value value;
};

using Record = std::vector<Field>;

/// Text prints one record as aligned "key value" lines and several as an
/// aligned table. CSV takes its header from the first record.
void write_records(std::ostream& out, const std::vector<Record>& records, OutputFormat format);

Record eval_record(const metrics::EvalReport& report, const std::vector<std::string>& class_names);

Record test_record(const stattest::TestResult& result, stattest::Statistic statistic, int bins,
                   double alpha);

std::vector<Record> compare_records(const std::vector<MethodSummary>& summaries);

/// One record per ensemble member. Dirichlet members show the canonical
/// parameters and interpretation points.
std::vector<Record> inspect_records(const EnsembleModel& model);

}  // namespace dircal::report
