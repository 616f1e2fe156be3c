#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dircal/csv.hpp"
#include "dircal/diagram.hpp"
#include "dircal/harness.hpp"
#include "dircal/metrics.hpp"
#include "dircal/model.hpp"
#include "dircal/report.hpp"
#include "dircal/serialize.hpp"
#include "dircal/stattest.hpp"

namespace dircal::cli {
namespace {

struct Common {
  std::string format = "text";
  double clip_floor = kDefaultClipFloor;
  int bins = metrics::kDefaultBins;
  std::uint64_t seed = 0;
  std::vector<std::string> labels;
};

struct HyperFlags {
  double lambda = 1e-3;
  double mu = 0.0;
  CLI::Option* mu_opt = nullptr;
  bool l2_no_intercept = false;
  int cal_bins = 10;
  bool grid = false;
  std::vector<double> lambda_grid;
  std::vector<double> mu_grid;
  std::vector<int> bin_grid;
  int max_iter = 500;
  double tol = 1e-8;

  bool wants_grid() const {
    return grid || !lambda_grid.empty() || !mu_grid.empty() || !bin_grid.empty();
  }

  Hyperparameters base(double clip_floor) const {
    Hyperparameters h;
    h.lambda = lambda;
    if (mu_opt && mu_opt->count() > 0) h.mu = mu;
    h.l2_intercept = !l2_no_intercept;
    h.cal_bins = cal_bins;
    h.clip_floor = clip_floor;
    return h;
  }

  HyperGrid make_grid() const {
    HyperGrid g = default_grid();
    if (!lambda_grid.empty()) g.lambdas = lambda_grid;
    if (!mu_grid.empty()) g.mus = mu_grid;
    if (!bin_grid.empty()) g.bins = bin_grid;
    return g;
  }

  optim::Options optimizer() const {
    optim::Options o;
    o.max_iterations = max_iter;
    o.tolerance = tol;
    return o;
  }
};

void add_format(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "Report format")
      ->check(CLI::IsMember({"text", "json-lines", "csv"}))
      ->capture_default_str();
}

void add_clip(CLI::App* cmd, Common& c) {
  cmd->add_option("--clip-floor", c.clip_floor, "Probability floor applied before log transforms")
      ->check(CLI::Range(1e-320, 0.5))
      ->capture_default_str();
}

void add_bins(CLI::App* cmd, Common& c) {
  cmd->add_option("--bins", c.bins, "Equal-width bins for ECE, MCE and diagrams")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
}

void add_seed(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed for folds and resampling")->capture_default_str();
}

void add_labels(CLI::App* cmd, Common& c) {
  cmd->add_option("--labels", c.labels, "Class names in column order")->delimiter(',');
}

void add_hyper(CLI::App* cmd, HyperFlags& h) {
  cmd->add_option("--lambda", h.lambda, "Weight regularisation strength")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  h.mu_opt = cmd->add_option("--mu", h.mu, "Intercept regularisation (default: tied to lambda)")
                 ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--l2-no-intercept", h.l2_no_intercept, "Leave intercepts unpenalized in L2 mode");
  cmd->add_option("--cal-bins", h.cal_bins, "Bins of the binning calibrators")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  cmd->add_flag("--grid", h.grid, "Search the default hyperparameter grid by inner CV");
  cmd->add_option("--lambda-grid", h.lambda_grid, "Comma-separated lambda candidates")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--mu-grid", h.mu_grid, "Comma-separated mu candidates (decouples mu)")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--bin-grid", h.bin_grid, "Comma-separated bin-count candidates")
      ->delimiter(',')
      ->check(CLI::Range(1, 100000));
  cmd->add_option("--max-iter", h.max_iter, "Optimizer iteration cap")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  cmd->add_option("--tol", h.tol, "Optimizer gradient tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

struct Loaded {
  PredictionTable table;
  std::vector<std::string> names;
  std::optional<LabelVector> y;
};

Loaded load(const std::string& path, const Common& c, bool require_labels,
            const EnsembleModel* model = nullptr) {
  Loaded d;
  d.table = read_predictions(std::filesystem::path(path));
  const int k = static_cast<int>(d.table.classes());
  if (model) {
    d.names = model->front().labels;
  } else if (d.table.labels || !c.labels.empty()) {
    d.names = infer_label_names(d.table.labels ? *d.table.labels : std::vector<std::string>{}, k,
                                c.labels);
  } else {
    for (int j = 0; j < k; ++j) d.names.push_back(std::to_string(j));
  }
  if (d.table.labels) {
    d.y = encode_labels(*d.table.labels, d.names);
  } else if (require_labels) {
    throw InvalidInput("'" + path + "' has no label column");
  }
  return d;
}

void check_kind(const EnsembleModel& model, const PredictionTable& table) {
  const auto& m = model.front();
  if (table.kind != m.input_kind) {
    throw InvalidInput("model expects " + input_kind_name(m.input_kind) + " but the input holds " +
                       input_kind_name(table.kind));
  }
  if (table.classes() != m.k) {
    throw InvalidInput("model expects " + std::to_string(m.k) + " classes, input has " +
                       std::to_string(table.classes()));
  }
}

/// Calibrated output when a model is given, else the raw predictions as
/// probabilities.
ProbabilityMatrix predictions(const Loaded& d, const EnsembleModel* model) {
  if (model) {
    check_kind(*model, d.table);
    return model->apply(d.table.values);
  }
  if (d.table.kind == InputKind::kLogits) return softmax_rows(d.table.values);
  return ProbabilityMatrix(d.table.values);
}

std::optional<EnsembleModel> maybe_model(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_model(std::filesystem::path(path));
}

void emit(std::ostream& out, const std::vector<report::Record>& records, const Common& c) {
  report::write_records(out, records, report::parse_format(c.format));
}

int cmd_fit(const std::string& input, const std::string& method_name_arg, const std::string& output,
            int folds, const Common& c, const HyperFlags& h, std::ostream& out) {
  const Method method = parse_method(method_name_arg);
  const Loaded d = load(input, c, true);
  const Hyperparameters base = h.base(c.clip_floor);
  const bool grid = h.wants_grid();
  const std::vector<Hyperparameters> candidates =
      grid ? expand_grid(method, h.make_grid(), base) : std::vector<Hyperparameters>{base};
  if (folds <= 0) folds = grid ? 3 : 1;
  if (grid && folds < 2) throw InvalidInput("grid search needs --folds of at least 2");
  if (static_cast<Index>(folds) > d.table.rows()) {
    throw InvalidInput("more folds than rows");
  }
  CvFit fitted = fit_with_cv(method, d.table.values, d.table.kind, *d.y, candidates, folds, c.seed,
                             h.optimizer());
  for (auto& m : fitted.model.members) {
    if (!m.converged) {
      throw FitError(method_name(method) +
                     ": optimizer stopped at the iteration cap before converging (see --max-iter)");
    }
    m.labels = d.names;
  }
  save_model(fitted.model, std::filesystem::path(output));

  const ProbabilityMatrix train = fitted.model.apply(d.table.values);
  report::Record r{{"method", method_name(method)},
                   {"members", static_cast<long long>(fitted.model.members.size())},
                   {"lambda", fitted.chosen.lambda},
                   {"mu", fitted.chosen.effective_mu(method)},
                   {"cal_bins", static_cast<long long>(fitted.chosen.cal_bins)},
                   {"train_log_loss", metrics::log_loss(train, *d.y, c.clip_floor)},
                   {"model", output}};
  emit(out, {r}, c);
  return kOk;
}

int cmd_apply(const std::string& model_path, const std::string& input, const std::string& output,
              std::ostream& out) {
  const EnsembleModel model = load_model(std::filesystem::path(model_path));
  const PredictionTable table = read_predictions(std::filesystem::path(input));
  check_kind(model, table);
  const ProbabilityMatrix p = model.apply(table.values);
  if (output.empty() || output == "-") {
    write_probabilities(out, p, table.labels);
    return kOk;
  }
  std::ostringstream buf;
  write_probabilities(buf, p, table.labels);
  std::ofstream file(output, std::ios::binary);
  if (!file) throw InvalidInput("cannot write '" + output + "'");
  file << buf.str();
  if (!file) throw InvalidInput("failed writing '" + output + "'");
  return kOk;
}

int cmd_eval(const std::string& input, const std::string& model_path, std::size_t resamples,
             bool skip_test, const Common& c, std::ostream& out) {
  const auto model = maybe_model(model_path);
  const Loaded d = load(input, c, true, model ? &*model : nullptr);
  const ProbabilityMatrix p = predictions(d, model ? &*model : nullptr);
  metrics::EvalReport rep = metrics::evaluate(p, *d.y, c.bins, c.clip_floor);
  if (!skip_test) {
    stattest::Options opt;
    opt.bins = c.bins;
    opt.resamples = resamples;
    opt.seed = c.seed;
    opt.statistic = stattest::Statistic::kConfidenceEce;
    rep.p_conf_ece = stattest::calibration_test(p, *d.y, opt).p_value;
    opt.statistic = stattest::Statistic::kClasswiseEce;
    rep.p_cw_ece = stattest::calibration_test(p, *d.y, opt).p_value;
  }
  emit(out, {report::eval_record(rep, d.names)}, c);
  return kOk;
}

int cmd_test(const std::string& input, const std::string& model_path,
             const std::string& statistic, std::size_t resamples, double alpha, bool plus_one,
             const Common& c, std::ostream& out) {
  const auto model = maybe_model(model_path);
  const Loaded d = load(input, c, true, model ? &*model : nullptr);
  const ProbabilityMatrix p = predictions(d, model ? &*model : nullptr);
  std::vector<stattest::Statistic> stats;
  if (statistic == "both") {
    stats = {stattest::Statistic::kConfidenceEce, stattest::Statistic::kClasswiseEce};
  } else {
    stats = {stattest::parse_statistic(statistic)};
  }
  std::vector<report::Record> records;
  for (auto s : stats) {
    stattest::Options opt;
    opt.statistic = s;
    opt.bins = c.bins;
    opt.resamples = resamples;
    opt.seed = c.seed;
    opt.plus_one = plus_one;
    records.push_back(report::test_record(stattest::calibration_test(p, *d.y, opt), s, c.bins, alpha));
  }
  emit(out, records, c);
  return kOk;
}

int cmd_diagram(const std::string& input, const std::string& model_path, const std::string& mode,
                const std::string& output, const Common& c, std::ostream& out) {
  const auto model = maybe_model(model_path);
  const Loaded d = load(input, c, true, model ? &*model : nullptr);
  const ProbabilityMatrix p = predictions(d, model ? &*model : nullptr);
  const auto m = mode == "classwise" ? metrics::ReliabilityMode::kClasswise
                                     : metrics::ReliabilityMode::kConfidence;
  const auto charts = diagram::reliability_charts(p, *d.y, m, c.bins);
  diagram::write_diagram(charts, d.names, std::filesystem::path(output));
  report::Record r{{"svg", output},
                   {"table", diagram::table_path(std::filesystem::path(output)).string()},
                   {"charts", static_cast<long long>(charts.size())}};
  emit(out, {r}, c);
  return kOk;
}

int cmd_compare(const std::string& input, const std::vector<std::string>& methods, int repeats,
                int folds, int inner_folds, std::size_t resamples, double alpha, const Common& c,
                const HyperFlags& h, std::ostream& out) {
  const Loaded d = load(input, c, true);
  CompareOptions opt;
  if (methods.empty()) {
    for (Method m : all_methods()) {
      if (!method_requires_logits(m) || d.table.kind == InputKind::kLogits) opt.methods.push_back(m);
    }
  } else {
    for (const auto& name : methods) opt.methods.push_back(parse_method(name));
  }
  if (h.wants_grid()) opt.grid = h.make_grid();
  opt.base = h.base(c.clip_floor);
  opt.repeats = repeats;
  opt.folds = folds;
  opt.inner_folds = inner_folds;
  opt.seed = c.seed;
  opt.bins = c.bins;
  opt.resamples = resamples;
  opt.alpha = alpha;
  const auto summaries = compare(d.table.values, d.table.kind, *d.y, opt, h.optimizer());
  emit(out, report::compare_records(summaries), c);
  return kOk;
}

int cmd_inspect(const std::string& model_path, const Common& c, std::ostream& out) {
  const EnsembleModel model = load_model(std::filesystem::path(model_path));
  emit(out, report::inspect_records(model), c);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiclass probability calibration: fit, apply, evaluate and compare calibrators",
               "dircal"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dircal 0.1.0");

  std::string method_names;
  for (Method m : all_methods()) method_names += (method_names.empty() ? "" : ", ") + method_name(m);

  Common fit_c;
  HyperFlags fit_h;
  std::string fit_in, fit_out, fit_method;
  int fit_folds = 0;
  auto* fit = app.add_subcommand("fit", "Fit a calibrator and write a model file");
  fit->add_option("input", fit_in, "Prediction CSV with a label column")->required();
  fit->add_option("-m,--method", fit_method, "One of: " + method_names)->required();
  fit->add_option("-o,--output", fit_out, "Model file to write")->required();
  fit->add_option("--folds", fit_folds,
                  "Inner CV folds; the fold models form an ensemble (default 1, or 3 with a grid)")
      ->check(CLI::Range(0, 1000));
  add_hyper(fit, fit_h);
  add_seed(fit, fit_c);
  add_clip(fit, fit_c);
  add_labels(fit, fit_c);
  add_format(fit, fit_c);

  std::string apply_model, apply_in, apply_out;
  auto* apply = app.add_subcommand("apply", "Calibrate predictions with a model file");
  apply->add_option("model", apply_model, "Model file")->required();
  apply->add_option("input", apply_in, "Prediction CSV")->required();
  apply->add_option("-o,--output", apply_out, "Output CSV (default: standard output)");

  Common eval_c;
  std::string eval_in, eval_model;
  std::size_t eval_resamples = stattest::kDefaultResamples;
  bool eval_skip = false;
  auto* eval = app.add_subcommand("eval", "Report accuracy, losses, ECEs, MCE and test p-values");
  eval->add_option("input", eval_in, "Prediction CSV with a label column")->required();
  eval->add_option("--model", eval_model, "Calibrate with this model before scoring");
  eval->add_option("--resamples", eval_resamples, "Resamples of the calibration test")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}))
      ->capture_default_str();
  eval->add_flag("--skip-test", eval_skip, "Omit the resampling p-values");
  add_bins(eval, eval_c);
  add_seed(eval, eval_c);
  add_clip(eval, eval_c);
  add_labels(eval, eval_c);
  add_format(eval, eval_c);

  Common test_c;
  std::string test_in, test_model, test_stat = "both";
  std::size_t test_resamples = stattest::kDefaultResamples;
  double test_alpha = stattest::kDefaultAlpha;
  bool test_plus_one = false;
  auto* test = app.add_subcommand("test", "Resampling test of calibration");
  test->add_option("input", test_in, "Prediction CSV with a label column")->required();
  test->add_option("--model", test_model, "Calibrate with this model before testing");
  test->add_option("--statistic", test_stat, "conf_ece, cw_ece or both")
      ->check(CLI::IsMember({"conf_ece", "cw_ece", "both"}))
      ->capture_default_str();
  test->add_option("--resamples", test_resamples, "Number of pseudo-label resamples")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}))
      ->capture_default_str();
  test->add_option("--alpha", test_alpha, "Significance level")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12))
      ->capture_default_str();
  test->add_flag("--plus-one", test_plus_one, "Report (count + 1) / (N + 1)");
  add_bins(test, test_c);
  add_seed(test, test_c);
  add_labels(test, test_c);
  add_format(test, test_c);

  Common diag_c;
  std::string diag_in, diag_model, diag_out, diag_mode = "confidence";
  auto* diag = app.add_subcommand("diagram", "Write a reliability diagram (SVG plus bin table)");
  diag->add_option("input", diag_in, "Prediction CSV with a label column")->required();
  diag->add_option("-o,--output", diag_out, "SVG path; the table goes to <stem>.bins.csv")
      ->required();
  diag->add_option("--mode", diag_mode, "confidence or classwise")
      ->check(CLI::IsMember({"confidence", "classwise"}))
      ->capture_default_str();
  diag->add_option("--model", diag_model, "Calibrate with this model first");
  add_bins(diag, diag_c);
  add_labels(diag, diag_c);
  add_format(diag, diag_c);

  Common cmp_c;
  HyperFlags cmp_h;
  std::string cmp_in;
  std::vector<std::string> cmp_methods;
  int cmp_repeats = 5, cmp_folds = 5, cmp_inner = 3;
  std::size_t cmp_resamples = stattest::kDefaultResamples;
  double cmp_alpha = stattest::kDefaultAlpha;
  auto* cmp = app.add_subcommand("compare", "Nested cross-validation comparison of methods");
  cmp->add_option("input", cmp_in, "Prediction CSV with a label column")->required();
  cmp->add_option("--methods", cmp_methods, "Comma-separated methods (default: all applicable)")
      ->delimiter(',');
  cmp->add_option("--repeats", cmp_repeats, "Outer CV repeats")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  cmp->add_option("--folds", cmp_folds, "Outer CV folds")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  cmp->add_option("--inner-folds", cmp_inner, "Inner CV folds per outer training part")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  cmp->add_option("--resamples", cmp_resamples, "Resamples per calibration test")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}))
      ->capture_default_str();
  cmp->add_option("--alpha", cmp_alpha, "Significance level of the acceptance rates")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12))
      ->capture_default_str();
  add_hyper(cmp, cmp_h);
  add_bins(cmp, cmp_c);
  add_seed(cmp, cmp_c);
  add_clip(cmp, cmp_c);
  add_labels(cmp, cmp_c);
  add_format(cmp, cmp_c);

  Common insp_c;
  std::string insp_model;
  auto* insp = app.add_subcommand("inspect", "Print a model's parameters");
  insp->add_option("model", insp_model, "Model file")->required();
  add_format(insp, insp_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ValidationError& e) {
    err << "dircal: " << e.what() << '\n';
    return kValidationError;
  } catch (const CLI::ParseError& e) {
    err << "dircal: " << e.what() << '\n';
    return kParseError;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_in, fit_method, fit_out, fit_folds, fit_c, fit_h, out);
    if (apply->parsed()) return cmd_apply(apply_model, apply_in, apply_out, out);
    if (eval->parsed()) return cmd_eval(eval_in, eval_model, eval_resamples, eval_skip, eval_c, out);
    if (test->parsed()) {
      return cmd_test(test_in, test_model, test_stat, test_resamples, test_alpha, test_plus_one,
                      test_c, out);
    }
    if (diag->parsed()) return cmd_diagram(diag_in, diag_model, diag_mode, diag_out, diag_c, out);
    if (cmp->parsed()) {
      return cmd_compare(cmp_in, cmp_methods, cmp_repeats, cmp_folds, cmp_inner, cmp_resamples,
                         cmp_alpha, cmp_c, cmp_h, out);
    }
    if (insp->parsed()) return cmd_inspect(insp_model, insp_c, out);
  } catch (const ParseError& e) {
    err << "dircal: parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const InvalidInput& e) {
    err << "dircal: invalid input: " << e.what() << '\n';
    return kValidationError;
  } catch (const DomainError& e) {
    err << "dircal: invalid input: " << e.what() << '\n';
    return kValidationError;
  } catch (const FitError& e) {
    err << "dircal: fit failed: " << e.what() << '\n';
    return kFitFailure;
  }
  return kParseError;
}

}  // namespace dircal::cli
