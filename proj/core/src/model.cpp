#include "dircal/model.hpp"

#include <array>
#include <utility>

namespace dircal {
namespace {

struct MethodEntry {
  Method method;
  const char* name;
};

constexpr std::array<MethodEntry, 11> kMethods{{
    {Method::kDirichletL2, "dirichlet_l2"},
    {Method::kDirichletOdir, "dirichlet_odir"},
    {Method::kTemperature, "temperature"},
    {Method::kVectorScaling, "vector_scaling"},
    {Method::kMatrixOdir, "matrix_odir"},
    {Method::kMatrixOdirZero, "matrix_odir_zero"},
    {Method::kOvrIsotonic, "ovr_isotonic"},
    {Method::kOvrWidthBin, "ovr_width_bin"},
    {Method::kOvrFreqBin, "ovr_freq_bin"},
    {Method::kOvrBeta, "ovr_beta"},
    {Method::kUncalibrated, "uncalibrated"},
}};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_dirichlet(Method m) { return m == Method::kDirichletL2 || m == Method::kDirichletOdir; }
bool is_affine(Method m) {
  return m == Method::kVectorScaling || m == Method::kMatrixOdir || m == Method::kMatrixOdirZero;
}
bool is_ovr(Method m) {
  return m == Method::kOvrIsotonic || m == Method::kOvrWidthBin || m == Method::kOvrFreqBin ||
         m == Method::kOvrBeta;
}

ovr::OvrKind ovr_kind(Method m) {
  switch (m) {
    case Method::kOvrIsotonic:
      return ovr::OvrKind::kIsotonic;
    case Method::kOvrWidthBin:
      return ovr::OvrKind::kWidthBinning;
    case Method::kOvrFreqBin:
      return ovr::OvrKind::kFrequencyBinning;
    default:
      return ovr::OvrKind::kBeta;
  }
}

std::vector<std::string> default_labels(int k) {
  std::vector<std::string> out;
  for (int j = 0; j < k; ++j) out.push_back(std::to_string(j));
  return out;
}

}  // namespace

std::string method_name(Method m) {
  for (const auto& e : kMethods) {
    if (e.method == m) return e.name;
  }
  throw InvalidInput("unknown method");
}

Method parse_method(const std::string& name) {
  for (const auto& e : kMethods) {
    if (name == e.name) return e.method;
  }
  throw InvalidInput("unknown calibration method '" + name + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> out;
    for (const auto& e : kMethods) out.push_back(e.method);
    return out;
  }();
  return methods;
}

bool method_requires_logits(Method m) { return m == Method::kTemperature || is_affine(m); }

std::string input_kind_name(InputKind kind) {
  return kind == InputKind::kLogits ? "logits" : "probabilities";
}

InputKind parse_input_kind(const std::string& name) {
  if (name == "logits") return InputKind::kLogits;
  if (name == "probabilities") return InputKind::kProbabilities;
  throw InvalidInput("unknown input kind '" + name + "'");
}

double Hyperparameters::effective_mu(Method m) const {
  if (mu) return *mu;
  return m == Method::kVectorScaling ? 0.0 : lambda;
}

ProbabilityMatrix prepare_probabilities(const Matrix& input, InputKind kind, double floor) {
  if (kind == InputKind::kLogits) return clip_probabilities(softmax_rows(input), floor);
  return clip_probabilities(ProbabilityMatrix(input), floor);
}

void CalibratorModel::validate() const {
  if (k < 2) throw InvalidInput("model: class count must be at least 2");
  if (labels.size() != static_cast<std::size_t>(k)) {
    throw InvalidInput("model: label dictionary size differs from class count");
  }
  if (method_requires_logits(method) && input_kind != InputKind::kLogits) {
    throw InvalidInput("model: " + method_name(method) + " requires logit input");
  }
  const auto kk = static_cast<Index>(k);
  std::visit(overloaded{
                 [&](const std::monostate&) {
                   if (method != Method::kUncalibrated) {
                     throw InvalidInput("model: missing parameters");
                   }
                 },
                 [&](const dirichlet::LinearParams& p) {
                   if (!is_dirichlet(method)) throw InvalidInput("model: parameter kind mismatch");
                   p.validate();
                   if (p.classes() != kk) throw InvalidInput("model: parameter shape mismatch");
                 },
                 [&](const scaling::TemperatureParams& p) {
                   if (method != Method::kTemperature) {
                     throw InvalidInput("model: parameter kind mismatch");
                   }
                   if (!(p.t > 0.0)) throw InvalidInput("model: temperature must be positive");
                 },
                 [&](const scaling::AffineLogitParams& p) {
                   if (!is_affine(method)) throw InvalidInput("model: parameter kind mismatch");
                   p.validate();
                   if (p.classes() != kk) throw InvalidInput("model: parameter shape mismatch");
                   if (method != Method::kMatrixOdir) {
                     Matrix off = p.W;
                     off.diagonal().setZero();
                     if (!off.isZero(0.0)) {
                       throw InvalidInput("model: diagonal-only map has off-diagonal weights");
                     }
                   }
                 },
                 [&](const ovr::OneVsRestModel& p) {
                   if (!is_ovr(method)) throw InvalidInput("model: parameter kind mismatch");
                   if (p.classes() != kk) throw InvalidInput("model: parameter shape mismatch");
                 },
             },
             params);
}

ProbabilityMatrix CalibratorModel::apply(const Matrix& input) const {
  if (input.cols() != k) {
    throw InvalidInput("model expects " + std::to_string(k) + " columns, input has " +
                       std::to_string(input.cols()));
  }
  return std::visit(
      overloaded{
          [&](const std::monostate&) {
            return prepare_probabilities(input, input_kind, hyper.clip_floor);
          },
          [&](const dirichlet::LinearParams& p) {
            return dirichlet::apply_linear(
                prepare_probabilities(input, input_kind, hyper.clip_floor), p);
          },
          [&](const scaling::TemperatureParams& p) {
            return scaling::apply_temperature(LogitMatrix(input), p);
          },
          [&](const scaling::AffineLogitParams& p) {
            return scaling::apply_affine_logit(LogitMatrix(input), p);
          },
          [&](const ovr::OneVsRestModel& p) {
            return ovr::apply_ovr(prepare_probabilities(input, input_kind, hyper.clip_floor), p);
          },
      },
      params);
}

const CalibratorModel& EnsembleModel::front() const {
  if (members.empty()) throw InvalidInput("ensemble has no members");
  return members.front();
}

void EnsembleModel::validate() const {
  const CalibratorModel& first = front();
  for (const auto& m : members) {
    m.validate();
    if (m.method != first.method || m.k != first.k || m.input_kind != first.input_kind ||
        m.labels != first.labels) {
      throw InvalidInput("ensemble members must share method, classes, labels and input kind");
    }
  }
}

ProbabilityMatrix EnsembleModel::apply(const Matrix& input) const {
  const CalibratorModel& first = front();
  if (members.size() == 1) return first.apply(input);
  Matrix sum = Matrix::Zero(input.rows(), first.k);
  for (const auto& m : members) sum += m.apply(input).values();
  for (Index i = 0; i < sum.rows(); ++i) sum.row(i) /= sum.row(i).sum();
  return ProbabilityMatrix(std::move(sum));
}

CalibratorModel fit_calibrator(Method method, const Matrix& input, InputKind kind,
                               const LabelVector& labels, const Hyperparameters& hyper,
                               std::uint64_t seed, const optim::Options& options) {
  if (method_requires_logits(method) && kind != InputKind::kLogits) {
    throw InvalidInput(method_name(method) + " requires logit input");
  }
  CalibratorModel model;
  model.method = method;
  model.k = static_cast<int>(input.cols());
  model.labels = default_labels(model.k);
  model.input_kind = kind;
  model.hyper = hyper;
  model.seed = seed;

  if (is_dirichlet(method)) {
    ProbabilityDataset data(prepare_probabilities(input, kind, hyper.clip_floor), labels);
    dirichlet::Regularization reg;
    if (method == Method::kDirichletL2) {
      reg = dirichlet::L2Config{hyper.lambda, hyper.l2_intercept};
    } else {
      reg = dirichlet::OdirConfig{hyper.lambda, hyper.effective_mu(method)};
    }
    auto fitted = dirichlet::fit(data, reg, options);
    model.converged = fitted.diagnostics.converged;
    model.params = std::move(fitted.params);
  } else if (method == Method::kTemperature) {
    LogitDataset data(LogitMatrix(input), labels);
    model.params = scaling::fit_temperature(data).params;
  } else if (is_affine(method)) {
    LogitDataset data(LogitMatrix(input), labels);
    const auto mode = method == Method::kVectorScaling ? scaling::AffineMode::kVector
                                                       : scaling::AffineMode::kMatrix;
    const dirichlet::OdirConfig reg{mode == scaling::AffineMode::kVector ? 0.0 : hyper.lambda,
                                    hyper.effective_mu(method)};
    auto fitted = scaling::fit_affine_logit(data, mode, reg, options);
    model.converged = fitted.diagnostics.converged;
    if (method == Method::kMatrixOdirZero) fitted.params = scaling::zero_offdiagonal(fitted.params);
    model.params = std::move(fitted.params);
  } else if (is_ovr(method)) {
    ProbabilityDataset data(prepare_probabilities(input, kind, hyper.clip_floor), labels);
    ovr::OvrConfig config;
    config.kind = ovr_kind(method);
    config.bins = hyper.cal_bins;
    model.params = ovr::fit_ovr(data, config);
  } else {
    if (labels.size() != static_cast<std::size_t>(input.rows())) {
      throw InvalidInput("label count differs from input rows");
    }
    model.params = std::monostate{};
  }
  return model;
}

}  // namespace dircal
