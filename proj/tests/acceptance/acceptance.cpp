// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dircal/dirichlet.hpp"
#include "dircal/metrics.hpp"
#include "dircal/model.hpp"
#include "dircal/ovr.hpp"
#include "dircal/rng.hpp"
#include "dircal/scaling.hpp"
#include "dircal/serialize.hpp"
#include "dircal/stattest.hpp"
#include "support/cli_run.hpp"
#include "support/oracles.hpp"
#include "support/sampling.hpp"

namespace dircal {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

double max_abs(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. linear -> canonical -> generative -> linear preserves the map; canonical round trip.
Outcome parametrization_chain() {
  const auto t0 = std::chrono::steady_clock::now();
  rng::Stream s(1001, 0);
  double worst_map = 0.0, worst_canon = 0.0;
  for (int draw = 0; draw < 200; ++draw) {
    const Index k = 2 + draw % 5;
    const dirichlet::LinearParams lin{testing::normal_matrix(s, k, k),
                                      testing::normal_vector(s, k)};
    const auto canon = dirichlet::to_canonical(lin);
    const auto back = dirichlet::from_generative(dirichlet::to_generative(canon));
    const auto again = dirichlet::to_canonical(dirichlet::to_linear(canon));
    worst_canon = std::max({worst_canon, (again.A - canon.A).cwiseAbs().maxCoeff(),
                            max_abs(again.c, canon.c)});
    for (int i = 0; i < 100; ++i) {
      const Vector q = testing::interior_point(s, k);
      const Vector ref = dirichlet::apply_linear(q, lin);
      worst_map = std::max({worst_map, max_abs(ref, dirichlet::apply_canonical(q, canon)),
                            max_abs(ref, dirichlet::apply_linear(q, back))});
    }
  }
  const double secs = seconds_since(t0);
  return {worst_map <= 1e-9 && worst_canon <= 1e-9 && secs < 10.0,
          fmt("map err %.2e, canonical err %.2e, %.2f s", worst_map, worst_canon, secs)};
}

// 2. Temperature scaling is the Dirichlet map with W = I/t, b = 0.
Outcome temperature_is_dirichlet() {
  rng::Stream s(1002, 0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Index k = 2 + i % 6;
    const Vector z = testing::normal_vector(s, k, 3.0);
    const scaling::TemperatureParams t{std::exp(4.0 * (s.next_uniform() - 0.5))};
    worst = std::max(worst, max_abs(scaling::apply_temperature(z, t),
                                    dirichlet::apply_linear(softmax(z),
                                                            scaling::temperature_as_dirichlet(t, k))));
  }
  return {worst <= 1e-12, fmt("max err %.2e over 1000 pairs", worst)};
}

// 3. A fitted L2 map recovers the true canonical map on well-specified data.
Outcome canonical_recovery() {
  rng::Stream s(1003, 0);
  dirichlet::GenerativeParams g;
  g.alpha.resize(3, 3);
  g.alpha << 4, 2, 2, 2, 4, 2, 2, 2, 4;
  g.pi = Vector::Constant(3, 1.0 / 3.0);
  const auto train = testing::sample_generative(g, 5000, s);
  const auto test = testing::sample_generative(g, 5000, s);
  Hyperparameters h;
  h.lambda = 1e-7;
  const auto model = fit_calibrator(Method::kDirichletL2, train.q, InputKind::kProbabilities,
                                    LabelVector(train.y, 3), h);
  const LabelVector y(test.y, 3);
  const ProbabilityMatrix raw(test.q);
  const auto fitted = model.apply(test.q);
  Matrix truth(test.q.rows(), 3);
  for (Index i = 0; i < truth.rows(); ++i) {
    truth.row(i) = dirichlet::apply_generative(test.q.row(i).transpose(), g).transpose();
  }
  const double ll_fit = metrics::log_loss(fitted, y);
  const double ll_true = metrics::log_loss(ProbabilityMatrix(truth), y);
  const double cw_fit = metrics::classwise_ece(fitted, y, 15).cw_ece;
  const double cw_raw = metrics::classwise_ece(raw, y, 15).cw_ece;
  return {ll_fit <= 1.01 * ll_true && cw_fit <= cw_raw,
          fmt("log-loss fitted %.5f vs true %.5f; ", ll_fit, ll_true) +
              fmt("cw-ECE fitted %.4f vs uncalibrated %.4f", cw_fit, cw_raw)};
}

// 4. ECE implementations agree with naive per-bin filtering; hand-enumerated example.
Outcome ece_oracles() {
  rng::Stream s(1004, 0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + static_cast<Index>(s.next_below(200));
    const Index k = 2 + static_cast<Index>(s.next_below(4));
    const int m = 1 + static_cast<int>(s.next_below(10));
    const Matrix p = testing::random_probabilities(s, n, k, 0.0).values();
    std::vector<int> y;
    for (Index i = 0; i < n; ++i) y.push_back(static_cast<int>(s.next_below(k)));
    const ProbabilityMatrix pm(p);
    const LabelVector labels(y, static_cast<int>(k));
    worst = std::max({worst,
                      std::abs(metrics::confidence_ece(pm, labels, m) -
                               oracle::confidence_ece(p, y, m)),
                      std::abs(metrics::classwise_ece(pm, labels, m).cw_ece -
                               oracle::classwise_ece(p, y, m))});
  }
  Matrix four(4, 2);
  four << 0.2, 0.8, 0.4, 0.6, 0.9, 0.1, 0.7, 0.3;
  const LabelVector y4({1, 1, 0, 0}, 2);
  const double conf = metrics::confidence_ece(ProbabilityMatrix(four), y4, 2);
  const double cw = metrics::classwise_ece(ProbabilityMatrix(four), y4, 2).cw_ece;
  return {worst <= 1e-12 && std::abs(conf - 0.25) <= 1e-12 && std::abs(cw - 0.25) <= 1e-12,
          fmt("oracle err %.2e; four rows conf %.4f cw %.4f", worst, conf, cw)};
}

// 5. p-value arithmetic and rejection rate under the null.
Outcome significance_test() {
  std::vector<double> resampled(10000, 0.0);
  std::fill(resampled.begin(), resampled.begin() + 170, 1.0);
  const double p170 = stattest::summarize(0.5, resampled, 0).p_value;

  const auto t0 = std::chrono::steady_clock::now();
  rng::Stream s(1005, 0);
  std::vector<stattest::TestResult> results;
  stattest::Options o;
  o.resamples = 1000;
  for (int r = 0; r < 200; ++r) {
    const auto p = testing::random_probabilities(s, 2000, 4);
    const auto y = testing::labels_from(p.values(), s);
    o.seed = static_cast<std::uint64_t>(r);
    auto res = stattest::calibration_test(p, y, o);
    res.resampled_statistics.clear();
    results.push_back(std::move(res));
  }
  const double rejection = 1.0 - stattest::acceptance_rate(results, 0.05);
  const double secs = seconds_since(t0);
  return {p170 == 0.017 && rejection >= 0.01 && rejection <= 0.10 && secs < 60.0,
          fmt("170/10000 -> %.3f; null rejection %.3f; %.1f s", p170, rejection, secs)};
}

double max_offdiag(const Matrix& w) {
  Matrix off = w;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff();
}

// 6. Huge ODIR penalties shrink off-diagonals to nothing.
Outcome odir_limit() {
  rng::Stream s(1006, 0);
  dirichlet::GenerativeParams g;
  g.alpha.resize(3, 3);
  g.alpha << 3, 1, 2, 1, 4, 1, 2, 2, 3;
  g.pi.resize(3);
  g.pi << 0.3, 0.3, 0.4;
  const auto sample = testing::sample_generative(g, 2000, s);
  const LabelVector y(sample.y, 3);
  Hyperparameters h;
  h.lambda = 1e6;

  const auto d = fit_calibrator(Method::kDirichletOdir, sample.q, InputKind::kProbabilities, y, h);
  const auto& dp = std::get<dirichlet::LinearParams>(d.params);
  const ProbabilityDataset pd(clip_probabilities(ProbabilityMatrix(sample.q)), y);
  const double d_off = max_offdiag(dp.W);
  const double d_delta =
      std::abs(dirichlet::log_loss(dirichlet::zero_offdiagonal(dp), pd) - dirichlet::log_loss(dp, pd));

  // Independent logits whose labels follow a cross-class mixing of the scores.
  const Matrix z = testing::normal_matrix(s, 2000, 3, 2.0);
  Matrix mix(3, 3);
  mix << 1.0, 0.6, 0.0, 0.0, 1.0, 0.6, 0.6, 0.0, 1.0;
  const LabelVector yz = testing::labels_from(softmax_rows(z * mix.transpose()).values(), s);
  const auto m = fit_calibrator(Method::kMatrixOdir, z, InputKind::kLogits, yz, h);
  const auto& mp = std::get<scaling::AffineLogitParams>(m.params);
  const LogitDataset ld{LogitMatrix(z), yz};
  const double m_off = max_offdiag(mp.W);
  const double m_delta = std::abs(scaling::affine_log_loss(ld, scaling::zero_offdiagonal(mp)) -
                                  scaling::affine_log_loss(ld, mp));
  return {d_off < 1e-3 && m_off < 1e-3 && d_delta < 1e-4 && m_delta < 1e-4,
          fmt("dirichlet off %.2e dloss %.2e; ", d_off, d_delta) +
              fmt("matrix off %.2e dloss %.2e", m_off, m_delta)};
}

double relative_error(const Vector& analytic, const Vector& numeric) {
  return (analytic - numeric).cwiseAbs().maxCoeff() / std::max(1.0, numeric.cwiseAbs().maxCoeff());
}

// 7. Analytic ODIR gradients against central differences.
Outcome odir_gradients() {
  rng::Stream s(1007, 0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Index k = 2 + t % 4;
    const Index n = 30;
    const dirichlet::OdirConfig reg{std::exp(3.0 * s.next_normal()), std::exp(3.0 * s.next_normal())};
    auto unpack = [k](const Vector& theta, Matrix* w, Vector* b) {
      *w = Matrix(k, k);
      for (Index i = 0; i < k; ++i) w->row(i) = theta.segment(i * k, k).transpose();
      *b = theta.tail(k);
    };
    Vector theta = testing::normal_vector(s, k * k + k);
    if (t % 2 == 0) {
      const auto p = testing::random_probabilities(s, n, k, 1e-3);
      const ProbabilityDataset data(p, testing::labels_from(p.values(), s));
      auto f = [&](const Vector& x) {
        dirichlet::LinearParams lp;
        unpack(x, &lp.W, &lp.b);
        return dirichlet::objective_and_gradient(lp, data, reg).value;
      };
      dirichlet::LinearParams lp;
      unpack(theta, &lp.W, &lp.b);
      worst = std::max(worst, relative_error(dirichlet::objective_and_gradient(lp, data, reg).gradient,
                                             oracle::central_difference(f, theta)));
    } else {
      const Matrix z = testing::normal_matrix(s, n, k, 2.0);
      const LogitDataset data(LogitMatrix(z), testing::labels_from(softmax_rows(z).values(), s));
      auto f = [&](const Vector& x) {
        scaling::AffineLogitParams ap;
        unpack(x, &ap.W, &ap.b);
        return scaling::affine_objective_and_gradient(ap, data, scaling::AffineMode::kMatrix, reg)
            .value;
      };
      scaling::AffineLogitParams ap;
      unpack(theta, &ap.W, &ap.b);
      worst = std::max(
          worst,
          relative_error(
              scaling::affine_objective_and_gradient(ap, data, scaling::AffineMode::kMatrix, reg)
                  .gradient,
              oracle::central_difference(f, theta)));
    }
  }
  return {worst <= 1e-5, fmt("max relative err %.2e over 50 configurations", worst)};
}

// 8. matrix(0, 0) <= vector <= temperature on training log-loss.
Outcome family_nesting() {
  rng::Stream s(1008, 0);
  double worst = -1e300;
  for (int t = 0; t < 20; ++t) {
    const Index k = 2 + t % 4;
    const Index n = 100 + 50 * (t % 5);
    const Matrix z = testing::normal_matrix(s, n, k, 0.5 + 0.25 * (t % 8));
    Matrix tilted = z;
    tilted.col(0) *= 0.5;
    const LogitDataset data(LogitMatrix(z), testing::labels_from(softmax_rows(tilted).values(), s));
    const double temp =
        scaling::temperature_log_loss(data, scaling::fit_temperature(data).params);
    const double vec = scaling::affine_log_loss(
        data, scaling::fit_affine_logit(data, scaling::AffineMode::kVector, {0.0, 0.0}).params);
    const double mat = scaling::affine_log_loss(
        data, scaling::fit_affine_logit(data, scaling::AffineMode::kMatrix, {0.0, 0.0}).params);
    worst = std::max({worst, mat - vec, vec - temp});
  }
  return {worst <= 1e-9, fmt("largest violation %.2e over 20 datasets", worst)};
}

// 9. PAV against the brute-force monotone least-squares formula.
Outcome isotonic_oracle() {
  rng::Stream s(1009, 0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + s.next_below(50);
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = t % 2 ? static_cast<double>(s.next_below(2)) : s.next_normal();
      w[i] = t % 3 ? 1.0 : 0.1 + s.next_uniform();
    }
    const auto got = ovr::pava(y, w);
    const auto want = oracle::isotonic(y, w);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  return {worst <= 1e-10, fmt("max err %.2e over 200 instances", worst)};
}

// 10. Two-class one-vs-rest beta and Dirichlet L2 fits coincide.
Outcome beta_coincidence() {
  rng::Stream s(1010, 0);
  const Index n = 1000;
  Matrix p(n, 2);
  std::vector<int> y;
  for (Index i = 0; i < n; ++i) {
    const double a = 0.02 + 0.96 * s.next_uniform();
    p(i, 0) = a;
    p(i, 1) = 1.0 - a;
    // A miscalibrated truth: class 0 more likely than predicted at the extremes.
    const double truth = 1.0 / (1.0 + std::pow((1.0 - a) / a, 1.7) * 0.8);
    y.push_back(s.next_uniform() < truth ? 0 : 1);
  }
  const LabelVector labels(y, 2);
  Hyperparameters h;
  h.lambda = 1e-10;
  const auto beta = fit_calibrator(Method::kOvrBeta, p, InputKind::kProbabilities, labels, h);
  const auto dir = fit_calibrator(Method::kDirichletL2, p, InputKind::kProbabilities, labels, h);
  Matrix grid(99, 2);
  for (int i = 0; i < 99; ++i) {
    grid(i, 0) = (i + 1) / 100.0;
    grid(i, 1) = 1.0 - grid(i, 0);
  }
  const double worst =
      (beta.apply(grid).values() - dir.apply(grid).values()).cwiseAbs().maxCoeff();
  return {worst <= 1e-6, fmt("max pointwise difference %.2e on 99 points", worst)};
}

// 11. Temperature on the three-row logit example.
Outcome temperature_closed_form() {
  Matrix z(3, 2);
  z << 2, 0, 0, 2, 2, 0;
  const LogitDataset data(LogitMatrix(z), LabelVector({0, 1, 1}, 2));
  const double t = scaling::fit_temperature(data).params.t;
  const double want = 2.0 / std::log(2.0);
  return {std::abs(t - want) <= 1e-3, fmt("t = %.6f, closed form %.6f", t, want)};
}

// 12. Command-line determinism and model-file round trips.
Outcome cli_determinism() {
  testing::ScratchDir dir("acceptance_cli");
  rng::Stream s(1012, 0);
  dirichlet::GenerativeParams g;
  g.alpha.resize(3, 3);
  g.alpha << 4, 2, 2, 2, 4, 2, 2, 2, 4;
  g.pi = Vector::Constant(3, 1.0 / 3.0);
  const auto sample = testing::sample_generative(g, 400, s);
  testing::write_table(dir.file("p.csv"), sample.q, sample.y, "p_");
  const Matrix z = sample.q.array().log().matrix();
  testing::write_table(dir.file("z.csv"), z, sample.y, "z_");

  std::vector<std::string> problems;
  for (const std::string method : {"dirichlet_l2", "dirichlet_odir", "ovr_isotonic", "temperature",
                                   "matrix_odir"}) {
    const bool logits = method == "temperature" || method == "matrix_odir";
    const std::string in = dir.file(logits ? "z.csv" : "p.csv");
    std::string outputs[2], models[2];
    for (int run = 0; run < 2; ++run) {
      const std::string m = dir.file(method + std::to_string(run) + ".json");
      const std::string o = dir.file(method + std::to_string(run) + ".csv");
      const auto f = testing::run_cli({"fit", in, "-m", method, "--grid", "--folds", "3", "--seed",
                                       "17", "-o", m});
      const auto a = testing::run_cli({"apply", m, in, "-o", o});
      if (f.code != 0 || a.code != 0) problems.push_back(method + " exit " + f.err + a.err);
      models[run] = testing::slurp(m);
      outputs[run] = testing::slurp(o);
    }
    if (models[0] != models[1] || outputs[0] != outputs[1]) {
      problems.push_back(method + " not bit-stable");
    }
  }

  double worst = 0.0;
  for (Method m : all_methods()) {
    const bool logits = method_requires_logits(m);
    const Matrix& in = logits ? z : sample.q;
    EnsembleModel e;
    e.members.push_back(fit_calibrator(m, in, logits ? InputKind::kLogits : InputKind::kProbabilities,
                                       LabelVector(sample.y, 3), Hyperparameters{}));
    const auto back = deserialize_model(serialize_model(e));
    worst = std::max(worst, (e.apply(in).values() - back.apply(in).values()).cwiseAbs().maxCoeff());
  }
  if (worst > 1e-15) problems.push_back("model round trip error " + fmt("%.2e", worst));

  const std::vector<std::string> cmp{"compare", dir.file("p.csv"), "--methods",
                                     "dirichlet_l2,ovr_width_bin,uncalibrated", "--repeats", "2",
                                     "--folds", "3", "--resamples", "200", "--seed", "5",
                                     "--format", "csv"};
  const auto c1 = testing::run_cli(cmp);
  const auto c2 = testing::run_cli(cmp);
  if (c1.code != 0 || c1.out.empty() || c1.out != c2.out) problems.push_back("compare differs");

  std::string detail = "fit/apply bit-stable, round trip err " + fmt("%.1e", worst) +
                       ", compare tables identical";
  if (!problems.empty()) {
    detail.clear();
    for (const auto& p : problems) detail += p + "; ";
  }
  return {problems.empty(), detail};
}

}  // namespace
}  // namespace dircal

int main() {
  using dircal::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"parametrization chain preserves the map", dircal::parametrization_chain},
      {"temperature scaling equals a Dirichlet map", dircal::temperature_is_dirichlet},
      {"synthetic canonical-map recovery", dircal::canonical_recovery},
      {"ECE matches brute-force oracles", dircal::ece_oracles},
      {"significance test arithmetic and null rate", dircal::significance_test},
      {"ODIR limit drives off-diagonals to zero", dircal::odir_limit},
      {"ODIR gradients match finite differences", dircal::odir_gradients},
      {"family nesting of logit scalers", dircal::family_nesting},
      {"PAV matches brute-force isotonic fit", dircal::isotonic_oracle},
      {"two-class beta and Dirichlet coincide", dircal::beta_coincidence},
      {"temperature closed form", dircal::temperature_closed_form},
      {"CLI determinism and round trips", dircal::cli_determinism},
  };
  int failures = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed in %.1f s\n", criteria.size() - failures, criteria.size(),
              dircal::seconds_since(start));
  return failures == 0 ? 0 : 1;
}
