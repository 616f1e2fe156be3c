#include "dircal/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dircal/csv.hpp"
#include "dircal/dirichlet.hpp"

namespace dircal::report {
namespace {

using Json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string number_text(double v) { return std::isnan(v) ? "nan" : format_double(v); }

std::string to_text(const Value& v, char sep) {
  return std::visit(overloaded{
                        [](const std::string& s) { return s; },
                        [](double d) { return number_text(d); },
                        [](long long i) { return std::to_string(i); },
                        [](bool b) { return std::string(b ? "true" : "false"); },
                        [sep](const std::vector<double>& xs) {
                          std::string out;
                          for (std::size_t i = 0; i < xs.size(); ++i) {
                            if (i) out += sep;
                            out += number_text(xs[i]);
                          }
                          return out;
                        },
                    },
                    v);
}

Json to_json(const Value& v) {
  auto num = [](double d) { return std::isfinite(d) ? Json(d) : Json(nullptr); };
  return std::visit(overloaded{
                        [](const std::string& s) { return Json(s); },
                        [&](double d) { return num(d); },
                        [](long long i) { return Json(i); },
                        [](bool b) { return Json(b); },
                        [&](const std::vector<double>& xs) {
                          Json arr = Json::array();
                          for (double d : xs) arr.push_back(num(d));
                          return arr;
                        },
                    },
                    v);
}

std::string csv_cell(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<double> to_vector(const Eigen::Ref<const Vector>& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? " " : "") + xs[i];
  return out;
}

void add_matrix(Record& r, const std::string& name, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    r.push_back({name + "_row_" + std::to_string(i), to_vector(m.row(i).transpose())});
  }
}

std::string calibrator_text(const ovr::BinaryCalibrator& c) {
  return std::visit(overloaded{
                        [](const ovr::IsotonicMap& m) {
                          return "isotonic(" + std::to_string(m.values.size()) + " steps)";
                        },
                        [](const ovr::BinningMap& m) {
                          return std::string(m.scheme == ovr::BinningScheme::kEqualWidth
                                                 ? "width_bin("
                                                 : "freq_bin(") +
                                 std::to_string(m.bin_values.size()) + " bins)";
                        },
                        [](const ovr::BetaParams& m) {
                          return "beta(a=" + format_double(m.a) + " b=" + format_double(m.b) +
                                 " c=" + format_double(m.c) + ")";
                        },
                    },
                    c);
}

}  // namespace

OutputFormat parse_format(const std::string& name) {
  if (name == "text") return OutputFormat::kText;
  if (name == "json-lines") return OutputFormat::kJsonLines;
  if (name == "csv") return OutputFormat::kCsv;
  throw InvalidInput("unknown output format '" + name + "' (expected text, json-lines or csv)");
}

void write_records(std::ostream& out, const std::vector<Record>& records, OutputFormat format) {
  if (records.empty()) return;
  switch (format) {
    case OutputFormat::kJsonLines:
      for (const auto& r : records) {
        Json obj = Json::object();
        for (const auto& f : r) obj[f.key] = to_json(f.value);
        out << obj.dump() << '\n';
      }
      return;
    case OutputFormat::kCsv: {
      const Record& head = records.front();
      for (std::size_t i = 0; i < head.size(); ++i) out << (i ? "," : "") << csv_cell(head[i].key);
      out << '\n';
      for (const auto& r : records) {
        for (std::size_t i = 0; i < r.size(); ++i) {
          out << (i ? "," : "") << csv_cell(to_text(r[i].value, ';'));
        }
        out << '\n';
      }
      return;
    }
    case OutputFormat::kText:
      break;
  }
  if (records.size() == 1) {
    std::size_t width = 0;
    for (const auto& f : records.front()) width = std::max(width, f.key.size());
    for (const auto& f : records.front()) {
      out << f.key << std::string(width - f.key.size() + 2, ' ') << to_text(f.value, ' ') << '\n';
    }
    return;
  }
  const Record& head = records.front();
  std::vector<std::size_t> width(head.size());
  for (std::size_t i = 0; i < head.size(); ++i) width[i] = head[i].key.size();
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], to_text(r[i].value, ' ').size());
    }
  }
  auto row = [&](auto cell) {
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string s = cell(i);
      out << s;
      if (i + 1 < width.size()) out << std::string(width[i] - s.size() + 2, ' ');
    }
    out << '\n';
  };
  row([&](std::size_t i) { return head[i].key; });
  for (const auto& r : records) {
    row([&](std::size_t i) { return i < r.size() ? to_text(r[i].value, ' ') : std::string(); });
  }
}

Record eval_record(const metrics::EvalReport& report, const std::vector<std::string>& class_names) {
  Record r{{"accuracy", report.accuracy},
           {"error_rate", report.error_rate},
           {"log_loss", report.log_loss},
           {"brier", report.brier},
           {"mce", report.mce},
           {"conf_ece", report.conf_ece},
           {"cw_ece", report.cw_ece}};
  if (report.p_conf_ece) r.push_back({"p_conf_ece", *report.p_conf_ece});
  if (report.p_cw_ece) r.push_back({"p_cw_ece", *report.p_cw_ece});
  for (Index j = 0; j < report.per_class_ece.size(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const std::string name = idx < class_names.size() ? class_names[idx] : std::to_string(j);
    r.push_back({"ece_class_" + name, report.per_class_ece(j)});
  }
  return r;
}

Record test_record(const stattest::TestResult& result, stattest::Statistic statistic, int bins,
                   double alpha) {
  return Record{{"statistic", stattest::statistic_name(statistic)},
                {"bins", static_cast<long long>(bins)},
                {"observed", result.observed_statistic},
                {"resamples", static_cast<long long>(result.n_resamples)},
                {"exceedances", static_cast<long long>(result.exceedances)},
                {"p_value", result.p_value},
                {"alpha", alpha},
                {"reject", result.p_value <= alpha},
                {"seed", std::to_string(result.seed)}};
}

std::vector<Record> compare_records(const std::vector<MethodSummary>& summaries) {
  std::vector<Record> out;
  for (const auto& s : summaries) {
    out.push_back(Record{{"method", method_name(s.method)},
                         {"folds", static_cast<long long>(s.evaluated_folds)},
                         {"failed", static_cast<long long>(s.failed_folds)},
                         {"accuracy", s.accuracy},
                         {"error_rate", s.error_rate},
                         {"log_loss", s.log_loss},
                         {"brier", s.brier},
                         {"mce", s.mce},
                         {"conf_ece", s.conf_ece},
                         {"cw_ece", s.cw_ece},
                         {"p_conf_ece", s.p_conf_ece},
                         {"p_cw_ece", s.p_cw_ece}});
  }
  return out;
}

std::vector<Record> inspect_records(const EnsembleModel& model) {
  std::vector<Record> out;
  for (std::size_t i = 0; i < model.members.size(); ++i) {
    const CalibratorModel& m = model.members[i];
    Record r{{"member", static_cast<long long>(i)},
             {"method", method_name(m.method)},
             {"k", static_cast<long long>(m.k)},
             {"input_kind", input_kind_name(m.input_kind)},
             {"labels", join(m.labels)},
             {"lambda", m.hyper.lambda},
             {"mu", m.hyper.effective_mu(m.method)},
             {"seed", std::to_string(m.seed)}};
    std::visit(overloaded{
                   [](const std::monostate&) {},
                   [&](const dirichlet::LinearParams& p) {
                     const auto canon = dirichlet::to_canonical(p);
                     add_matrix(r, "A", canon.A);
                     r.push_back({"c", to_vector(canon.c)});
                     const auto points = dirichlet::interpretation_points(canon);
                     for (std::size_t j = 0; j < points.size(); ++j) {
                       const std::string tag =
                           j + 1 == points.size() ? "centre" : std::to_string(j);
                       r.push_back({"point_" + tag, to_vector(points[j].point)});
                       r.push_back({"image_" + tag, to_vector(points[j].image)});
                     }
                   },
                   [&](const scaling::TemperatureParams& p) { r.push_back({"t", p.t}); },
                   [&](const scaling::AffineLogitParams& p) {
                     add_matrix(r, "W", p.W);
                     r.push_back({"b", to_vector(p.b)});
                   },
                   [&](const ovr::OneVsRestModel& p) {
                     for (std::size_t j = 0; j < p.per_class.size(); ++j) {
                       r.push_back({"class_" + std::to_string(j), calibrator_text(p.per_class[j])});
                     }
                   },
               },
               m.params);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dircal::report
