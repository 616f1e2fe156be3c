#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "dircal/dirichlet.hpp"
#include "dircal/metrics.hpp"
#include "dircal/ovr.hpp"
#include "dircal/rng.hpp"
#include "dircal/scaling.hpp"
#include "dircal/stattest.hpp"

namespace {

using namespace dircal;

Matrix simplex_rows(rng::Stream& s, Index n, Index k) {
  Matrix p(n, k);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < k; ++j) p(i, j) = -std::log(1.0 - s.next_uniform());
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

LabelVector draw_labels(rng::Stream& s, const Matrix& p) {
  std::vector<int> y;
  for (Index i = 0; i < p.rows(); ++i) y.push_back(rng::categorical(p.row(i), s.next_uniform()));
  return LabelVector(std::move(y), static_cast<int>(p.cols()));
}

void BM_DirichletFit(benchmark::State& state) {
  rng::Stream s(1, 0);
  const Index k = state.range(0);
  const Matrix p = simplex_rows(s, 5000, k);
  const ProbabilityDataset data(clip_probabilities(ProbabilityMatrix(p)), draw_labels(s, p));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dirichlet::fit(data, dirichlet::OdirConfig{1e-3, 1e-3}));
  }
}
BENCHMARK(BM_DirichletFit)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_TemperatureFit(benchmark::State& state) {
  rng::Stream s(2, 0);
  Matrix z(5000, 10);
  for (Index i = 0; i < z.size(); ++i) z(i) = 3.0 * s.next_normal();
  const LogitDataset data(LogitMatrix(z), draw_labels(s, softmax_rows(z).values()));
  for (auto _ : state) benchmark::DoNotOptimize(scaling::fit_temperature(data));
}
BENCHMARK(BM_TemperatureFit)->Unit(benchmark::kMillisecond);

void BM_ClasswiseEce(benchmark::State& state) {
  rng::Stream s(3, 0);
  const Matrix p = simplex_rows(s, state.range(0), 10);
  const ProbabilityMatrix pm(p);
  const LabelVector y = draw_labels(s, p);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::classwise_ece(pm, y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClasswiseEce)->Arg(1000)->Arg(10000);

void BM_CalibrationTest(benchmark::State& state) {
  rng::Stream s(4, 0);
  const Matrix p = simplex_rows(s, 2000, 4);
  const ProbabilityMatrix pm(p);
  const LabelVector y = draw_labels(s, p);
  stattest::Options o;
  o.resamples = 1000;
  o.statistic = state.range(0) ? stattest::Statistic::kClasswiseEce
                               : stattest::Statistic::kConfidenceEce;
  for (auto _ : state) benchmark::DoNotOptimize(stattest::calibration_test(pm, y, o));
}
BENCHMARK(BM_CalibrationTest)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Pava(benchmark::State& state) {
  rng::Stream s(5, 0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> y(n), w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) y[i] = s.next_uniform() < static_cast<double>(i) / n;
  for (auto _ : state) benchmark::DoNotOptimize(ovr::pava(y, w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Pava)->Arg(1000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
