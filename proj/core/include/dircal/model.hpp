#pragma once

// A fitted calibrator of any method behind one apply contract, and the
// averaging ensemble built from inner cross-validation folds.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dircal/core.hpp"
#include "dircal/dirichlet.hpp"
#include "dircal/optim.hpp"
#include "dircal/ovr.hpp"
#include "dircal/scaling.hpp"

namespace dircal {

enum class Method {
  kDirichletL2,
  kDirichletOdir,
  kTemperature,
  kVectorScaling,
  kMatrixOdir,
  kMatrixOdirZero,
  kOvrIsotonic,
  kOvrWidthBin,
  kOvrFreqBin,
  kOvrBeta,
  kUncalibrated,
};

std::string method_name(Method m);
/// Throws InvalidInput for unknown names.
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();
/// Temperature, vector and matrix scaling consume logits.
bool method_requires_logits(Method m);

enum class InputKind { kProbabilities, kLogits };
std::string input_kind_name(InputKind kind);
InputKind parse_input_kind(const std::string& name);

struct Hyperparameters {
  double lambda = 1e-3;
  /// Intercept penalty. Unset: tied to lambda for ODIR methods, 0 for vector scaling.
  std::optional<double> mu;
  bool l2_intercept = true;
  int cal_bins = 10;
  double clip_floor = kDefaultClipFloor;

  double effective_mu(Method m) const;
};

using CalibratorParams =
    std::variant<std::monostate, dirichlet::LinearParams, scaling::TemperatureParams,
                 scaling::AffineLogitParams, ovr::OneVsRestModel>;

struct CalibratorModel {
  Method method = Method::kUncalibrated;
  int k = 0;
  std::vector<std::string> labels;  // label dictionary; entry j names column j
  InputKind input_kind = InputKind::kProbabilities;
  Hyperparameters hyper;
  std::uint64_t seed = 0;
  CalibratorParams params;
  /// False when an iterative fit stopped at its iteration cap. Not serialized.
  bool converged = true;

  void validate() const;
  /// `input` is n x k in this model's input kind.
  ProbabilityMatrix apply(const Matrix& input) const;
};

/// Members share method, k, labels and input kind; the prediction is the
/// row-wise mean of member outputs, renormalized.
struct EnsembleModel {
  std::vector<CalibratorModel> members;

  const CalibratorModel& front() const;
  void validate() const;
  ProbabilityMatrix apply(const Matrix& input) const;
};

/// Probabilities for probability-based calibrators: softmax for logits,
/// validation for probabilities, then clipping at `floor`.
ProbabilityMatrix prepare_probabilities(const Matrix& input, InputKind kind, double floor);

/// Fits `method` on all rows. Throws InvalidInput for an input kind the
/// method cannot use, FitError when the optimizer breaks down.
CalibratorModel fit_calibrator(Method method, const Matrix& input, InputKind kind,
                               const LabelVector& labels, const Hyperparameters& hyper,
                               std::uint64_t seed = 0, const optim::Options& options = {});

}  // namespace dircal
