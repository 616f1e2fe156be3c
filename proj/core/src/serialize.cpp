#include "dircal/serialize.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dircal {
namespace {

using Json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Json flat(const Matrix& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

Json flat(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

const Json& field(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(std::string("model file: missing field '") + key + "'");
  }
  return obj.at(key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string("model file: '") + what + "' is not a number");
  return j.get<double>();
}

std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string("model file: '") + what + "' is not an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(number(e, what));
  return out;
}

Matrix read_matrix(const Json& j, const char* what, Index k) {
  const auto v = numbers(j, what);
  if (v.size() != static_cast<std::size_t>(k * k)) {
    throw ParseError(std::string("model file: '") + what + "' must hold k*k values");
  }
  Matrix m(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index c = 0; c < k; ++c) m(i, c) = v[static_cast<std::size_t>(i * k + c)];
  }
  return m;
}

Vector read_vector(const Json& j, const char* what, Index k) {
  const auto v = numbers(j, what);
  if (v.size() != static_cast<std::size_t>(k)) {
    throw ParseError(std::string("model file: '") + what + "' must hold k values");
  }
  return Eigen::Map<const Vector>(v.data(), k);
}

std::string scheme_name(ovr::BinningScheme s) {
  return s == ovr::BinningScheme::kEqualWidth ? "equal_width" : "equal_frequency";
}

Json calibrator_json(const ovr::BinaryCalibrator& c) {
  return std::visit(overloaded{
                        [](const ovr::IsotonicMap& m) {
                          return Json{{"type", "isotonic"},
                                      {"breakpoints", m.breakpoints},
                                      {"values", m.values}};
                        },
                        [](const ovr::BinningMap& m) {
                          return Json{{"type", "binning"},
                                      {"scheme", scheme_name(m.scheme)},
                                      {"edges", m.edges},
                                      {"values", m.bin_values}};
                        },
                        [](const ovr::BetaParams& m) {
                          return Json{{"type", "beta"}, {"a", m.a}, {"b", m.b}, {"c", m.c}};
                        },
                    },
                    c);
}

ovr::BinaryCalibrator read_calibrator(const Json& j) {
  const Json& type = field(j, "type");
  if (type == "isotonic") {
    ovr::IsotonicMap m;
    m.breakpoints = numbers(field(j, "breakpoints"), "breakpoints");
    m.values = numbers(field(j, "values"), "values");
    if (m.breakpoints.size() != m.values.size() || m.values.empty()) {
      throw ParseError("model file: isotonic map needs matching nonempty breakpoints and values");
    }
    return m;
  }
  if (type == "binning") {
    ovr::BinningMap m;
    const Json& scheme = field(j, "scheme");
    if (scheme == "equal_width") {
      m.scheme = ovr::BinningScheme::kEqualWidth;
    } else if (scheme == "equal_frequency") {
      m.scheme = ovr::BinningScheme::kEqualFrequency;
    } else {
      throw ParseError("model file: unknown binning scheme");
    }
    m.edges = numbers(field(j, "edges"), "edges");
    m.bin_values = numbers(field(j, "values"), "values");
    if (m.bin_values.empty() || m.edges.size() != m.bin_values.size() + 1) {
      throw ParseError("model file: binning map needs one more edge than values");
    }
    return m;
  }
  if (type == "beta") {
    return ovr::BetaParams{number(field(j, "a"), "a"), number(field(j, "b"), "b"),
                           number(field(j, "c"), "c")};
  }
  throw ParseError("model file: unknown binary calibrator type");
}

Json params_json(const CalibratorParams& params) {
  return std::visit(
      overloaded{
          [](const std::monostate&) { return Json::object(); },
          [](const dirichlet::LinearParams& p) { return Json{{"W", flat(p.W)}, {"b", flat(p.b)}}; },
          [](const scaling::TemperatureParams& p) { return Json{{"t", p.t}}; },
          [](const scaling::AffineLogitParams& p) {
            return Json{{"W", flat(p.W)}, {"b", flat(p.b)}};
          },
          [](const ovr::OneVsRestModel& p) {
            Json list = Json::array();
            for (const auto& c : p.per_class) list.push_back(calibrator_json(c));
            return Json{{"calibrators", list}};
          },
      },
      params);
}

CalibratorParams read_params(const Json& j, Method method, Index k) {
  switch (method) {
    case Method::kDirichletL2:
    case Method::kDirichletOdir:
      return dirichlet::LinearParams{read_matrix(field(j, "W"), "W", k),
                                     read_vector(field(j, "b"), "b", k)};
    case Method::kTemperature:
      return scaling::TemperatureParams{number(field(j, "t"), "t")};
    case Method::kVectorScaling:
    case Method::kMatrixOdir:
    case Method::kMatrixOdirZero:
      return scaling::AffineLogitParams{read_matrix(field(j, "W"), "W", k),
                                        read_vector(field(j, "b"), "b", k)};
    case Method::kOvrIsotonic:
    case Method::kOvrWidthBin:
    case Method::kOvrFreqBin:
    case Method::kOvrBeta: {
      const Json& list = field(j, "calibrators");
      if (!list.is_array()) throw ParseError("model file: 'calibrators' is not an array");
      ovr::OneVsRestModel m;
      for (const auto& c : list) m.per_class.push_back(read_calibrator(c));
      return m;
    }
    case Method::kUncalibrated:
      break;
  }
  return std::monostate{};
}

Json member_json(const CalibratorModel& m) {
  Json hyper{{"lambda", m.hyper.lambda}};
  hyper["mu"] = m.hyper.mu ? Json(*m.hyper.mu) : Json(nullptr);
  hyper["l2_intercept"] = m.hyper.l2_intercept;
  hyper["cal_bins"] = m.hyper.cal_bins;
  hyper["clip_floor"] = m.hyper.clip_floor;
  return Json{{"method", method_name(m.method)},
              {"k", m.k},
              {"labels", m.labels},
              {"input_kind", input_kind_name(m.input_kind)},
              {"hyperparameters", hyper},
              {"seed", m.seed},
              {"params", params_json(m.params)}};
}

CalibratorModel read_member(const Json& j) {
  CalibratorModel m;
  try {
    m.method = parse_method(field(j, "method").get<std::string>());
    m.input_kind = parse_input_kind(field(j, "input_kind").get<std::string>());
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  const Json& k = field(j, "k");
  if (!k.is_number_integer() || k.get<long long>() < 2 || k.get<long long>() > 100000) {
    throw ParseError("model file: 'k' must be an integer >= 2");
  }
  m.k = k.get<int>();
  m.labels = field(j, "labels").get<std::vector<std::string>>();
  const Json& h = field(j, "hyperparameters");
  m.hyper.lambda = number(field(h, "lambda"), "lambda");
  const Json& mu = field(h, "mu");
  if (!mu.is_null()) m.hyper.mu = number(mu, "mu");
  m.hyper.l2_intercept = field(h, "l2_intercept").get<bool>();
  m.hyper.cal_bins = field(h, "cal_bins").get<int>();
  m.hyper.clip_floor = number(field(h, "clip_floor"), "clip_floor");
  const Json& seed = field(j, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw ParseError("model file: 'seed' must be a non-negative integer");
  }
  m.seed = seed.get<std::uint64_t>();
  m.params = read_params(field(j, "params"), m.method, m.k);
  return m;
}

}  // namespace

std::string serialize_model(const EnsembleModel& model) {
  model.validate();
  Json members = Json::array();
  for (const auto& m : model.members) members.push_back(member_json(m));
  Json doc{{"schema", kModelSchema}, {"members", members}};
  return doc.dump(2) + "\n";
}

EnsembleModel deserialize_model(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  EnsembleModel model;
  try {
    const Json& schema = field(doc, "schema");
    if (!schema.is_string() || schema.get<std::string>() != kModelSchema) {
      throw ParseError("model file: unsupported schema (expected " + std::string(kModelSchema) +
                       ")");
    }
    const Json& members = field(doc, "members");
    if (!members.is_array() || members.empty()) {
      throw ParseError("model file: 'members' must be a nonempty array");
    }
    for (const auto& m : members) model.members.push_back(read_member(m));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  model.validate();
  return model;
}

void save_model(const EnsembleModel& model, const std::filesystem::path& path) {
  const std::string text = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write model file '" + path.string() + "'");
  out << text;
  if (!out) throw InvalidInput("failed writing model file '" + path.string() + "'");
}

EnsembleModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace dircal
