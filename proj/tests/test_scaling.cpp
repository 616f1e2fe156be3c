#include <cmath>

#include <gtest/gtest.h>

#include "dircal/metrics.hpp"
#include "dircal/rng.hpp"
#include "dircal/scaling.hpp"
#include "support/oracles.hpp"
#include "support/sampling.hpp"

namespace dircal::scaling {
namespace {

LogitDataset logits(std::initializer_list<std::pair<double, double>> rows, std::vector<int> y) {
  Matrix z(static_cast<Index>(rows.size()), 2);
  Index i = 0;
  for (const auto& [a, b] : rows) {
    z(i, 0) = a;
    z(i, 1) = b;
    ++i;
  }
  return LogitDataset(LogitMatrix(z), LabelVector(std::move(y), 2));
}

LogitDataset random_logit_data(rng::Stream& s, Index n, Index k, double scale) {
  const Matrix z = testing::normal_matrix(s, n, k, scale);
  const auto p = softmax_rows(z);
  return LogitDataset(LogitMatrix(z), testing::labels_from(p.values(), s));
}

TEST(ApplyTemperature, Examples) {
  Matrix z(1, 2);
  z << 2.0, 0.0;
  const auto a = apply_temperature(LogitMatrix(z), TemperatureParams{2.0});
  EXPECT_NEAR(a.values()(0, 0), 0.7311, 1e-4);
  EXPECT_NEAR(a.values()(0, 1), 0.2689, 1e-4);
  EXPECT_LE((apply_temperature(LogitMatrix(z), TemperatureParams{1.0}).values() -
             softmax_rows(z).values())
                .cwiseAbs()
                .maxCoeff(),
            0.0);
  z << 5.0, -5.0;
  const auto flat = apply_temperature(LogitMatrix(z), TemperatureParams{1e6});
  EXPECT_NEAR(flat.values()(0, 0), 0.5, 1e-5);
  EXPECT_THROW(apply_temperature(LogitMatrix(z), TemperatureParams{0.0}), InvalidInput);
  EXPECT_THROW(apply_temperature(LogitMatrix(z), TemperatureParams{-1.0}), InvalidInput);
}

TEST(FitTemperature, ClosedFormOptimum) {
  const auto fit = fit_temperature(logits({{2, 0}, {0, 2}, {2, 0}}, {0, 1, 1}));
  EXPECT_NEAR(fit.params.t, 2.0 / std::log(2.0), 1e-3);
  EXPECT_FALSE(fit.at_bound);
}

TEST(FitTemperature, ClampsAtBounds) {
  const auto sharp = fit_temperature(logits({{2, 0}, {0, 2}}, {0, 1}));
  EXPECT_EQ(sharp.params.t, 1e-2);
  EXPECT_TRUE(sharp.at_bound);
  const auto flat = fit_temperature(logits({{2, 0}, {2, 0}}, {0, 1}));
  EXPECT_EQ(flat.params.t, 1e2);
  EXPECT_TRUE(flat.at_bound);
}

TEST(FitTemperature, AlwaysWithinBoundsAndRejectsOneClass) {
  rng::Stream s(41, 0);
  for (int t = 0; t < 30; ++t) {
    const auto data = random_logit_data(s, 50, 3, 0.1 + 5.0 * s.next_uniform());
    const auto fit = fit_temperature(data);
    EXPECT_GE(fit.params.t, 1e-2);
    EXPECT_LE(fit.params.t, 1e2);
  }
  EXPECT_THROW(logits({{1, 0}, {0, 1}}, {0, 0}), InvalidInput);
}

TEST(TemperatureAsDirichlet, Examples) {
  const auto one = temperature_as_dirichlet(TemperatureParams{1.0}, 3);
  EXPECT_EQ(one.W, Matrix::Identity(3, 3));
  EXPECT_EQ(one.b, Vector::Zero(3));
  const auto two = temperature_as_dirichlet(TemperatureParams{2.0}, 2);
  EXPECT_EQ(two.W, 0.5 * Matrix::Identity(2, 2));
}

TEST(TemperatureAsDirichlet, ReproducesTemperatureScaling) {
  rng::Stream s(42, 0);
  for (int i = 0; i < 200; ++i) {
    const Index k = 2 + static_cast<Index>(s.next_below(5));
    const Vector z = testing::normal_vector(s, k, 3.0);
    const TemperatureParams t{std::exp(3.0 * (s.next_uniform() - 0.5))};
    const Vector direct = apply_temperature(z, t);
    const Vector viaq = dirichlet::apply_linear(softmax(z), temperature_as_dirichlet(t, k));
    EXPECT_LE((direct - viaq).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ApplyTemperature, PreservesArgmax) {
  rng::Stream s(43, 0);
  const Matrix z = testing::normal_matrix(s, 300, 4, 2.0);
  const auto before = softmax_rows(z);
  const auto after = apply_temperature(LogitMatrix(z), TemperatureParams{3.7});
  const LabelVector y = testing::labels_from(before.values(), s);
  EXPECT_EQ(metrics::confusion_delta(metrics::confusion_matrix(before, y),
                                     metrics::confusion_matrix(after, y)),
            Eigen::MatrixXi::Zero(4, 4));
}

TEST(AffineLogit, ApplyMatchesDefinition) {
  rng::Stream s(44, 0);
  const AffineLogitParams p{testing::normal_matrix(s, 3, 3), testing::normal_vector(s, 3)};
  const Vector z = testing::normal_vector(s, 3);
  const Vector expect = softmax(p.W * z + p.b);
  EXPECT_LE((apply_affine_logit(z, p) - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AffineLogit, GradientMatchesFiniteDifferences) {
  rng::Stream s(45, 0);
  for (int t = 0; t < 30; ++t) {
    const Index k = 2 + static_cast<Index>(s.next_below(4));
    const auto data = random_logit_data(s, 40, k, 2.0);
    const AffineMode mode = t % 2 ? AffineMode::kVector : AffineMode::kMatrix;
    const dirichlet::OdirConfig reg{s.next_uniform(), s.next_uniform()};
    AffineLogitParams p{testing::normal_matrix(s, k, k), testing::normal_vector(s, k)};
    if (mode == AffineMode::kVector) p = zero_offdiagonal(p);
    const auto v = affine_objective_and_gradient(p, data, mode, reg);
    auto f = [&](const Vector& theta) {
      AffineLogitParams x{Matrix(k, k), theta.tail(k)};
      for (Index i = 0; i < k; ++i) x.W.row(i) = theta.segment(i * k, k).transpose();
      return affine_objective_and_gradient(x, data, AffineMode::kMatrix, reg).value;
    };
    Vector theta(k * k + k);
    for (Index i = 0; i < k; ++i) theta.segment(i * k, k) = p.W.row(i).transpose();
    theta.tail(k) = p.b;
    // The matrix objective restricted to diagonal W equals the vector objective.
    const Vector fd = oracle::central_difference(f, theta);
    if (mode == AffineMode::kMatrix) {
      ASSERT_EQ(v.gradient.size(), k * k + k);
      EXPECT_LE((fd - v.gradient).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff()),
                1e-5);
    } else {
      ASSERT_EQ(v.gradient.size(), 2 * k);
      Vector expect(2 * k);
      for (Index i = 0; i < k; ++i) expect(i) = fd(i * k + i);
      expect.tail(k) = fd.tail(k);
      EXPECT_LE((expect - v.gradient).cwiseAbs().maxCoeff() /
                    std::max(1.0, expect.cwiseAbs().maxCoeff()),
                1e-5);
    }
  }
}

TEST(AffineLogit, LogLossMatchesOracle) {
  rng::Stream s(46, 0);
  const auto data = random_logit_data(s, 100, 4, 1.5);
  const AffineLogitParams p{testing::normal_matrix(s, 4, 4), testing::normal_vector(s, 4)};
  EXPECT_NEAR(affine_log_loss(data, p),
              oracle::affine_log_loss(data.predictions().values(), data.labels().values(), p.W, p.b),
              1e-12);
}

TEST(FitAffine, WellSpecifiedRecovery) {
  rng::Stream s(47, 0);
  const auto train = random_logit_data(s, 5000, 3, 1.5);
  const auto test = random_logit_data(s, 5000, 3, 1.5);
  const auto fit = fit_affine_logit(train, AffineMode::kMatrix, {1e-7, 1e-7});
  const double fitted = affine_log_loss(test, fit.params);
  const double identity = affine_log_loss(test, {Matrix::Identity(3, 3), Vector::Zero(3)});
  EXPECT_LE(fitted, identity * 1.01);
}

TEST(FitAffine, VectorModeKeepsOffDiagonalZero) {
  rng::Stream s(48, 0);
  const auto data = random_logit_data(s, 300, 4, 2.0);
  const auto fit = fit_affine_logit(data, AffineMode::kVector, {0.0, 0.0});
  Matrix off = fit.params.W;
  off.diagonal().setZero();
  EXPECT_EQ(off.cwiseAbs().maxCoeff(), 0.0);
}

TEST(FitAffine, VectorBeatsTemperatureOnItsExample) {
  const auto data = logits({{2, 0}, {0, 2}, {2, 0}}, {0, 1, 1});
  const auto t = fit_temperature(data);
  const auto v = fit_affine_logit(data, AffineMode::kVector, {0.0, 0.0});
  EXPECT_LE(affine_log_loss(data, v.params), temperature_log_loss(data, t.params) + 1e-9);
}

TEST(FitAffine, HugeLambdaApproachesVectorScaling) {
  rng::Stream s(49, 0);
  const auto data = random_logit_data(s, 800, 3, 2.0);
  const auto m = fit_affine_logit(data, AffineMode::kMatrix, {1e6, 0.0});
  const auto v = fit_affine_logit(data, AffineMode::kVector, {0.0, 0.0});
  Matrix off = m.params.W;
  off.diagonal().setZero();
  EXPECT_LT(off.cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_NEAR(affine_log_loss(data, m.params), affine_log_loss(data, v.params), 1e-3);
  EXPECT_LT(affine_log_loss(data, zero_offdiagonal(m.params)) - affine_log_loss(data, m.params),
            1e-4);
}

TEST(ZeroOffdiagonal, Examples) {
  Matrix w(2, 2);
  w << 1, 2, 3, 4;
  const auto z = zero_offdiagonal(AffineLogitParams{w, Vector::Ones(2)});
  Matrix expect(2, 2);
  expect << 1, 0, 0, 4;
  EXPECT_EQ(z.W, expect);
  EXPECT_EQ(z.b, Vector::Ones(2));
  EXPECT_EQ(zero_offdiagonal(AffineLogitParams{expect, Vector::Zero(2)}).W, expect);
}

TEST(FitAffine, NeedsEnoughRows) {
  Matrix z = Matrix::Zero(2, 3);
  z(0, 0) = 1.0;
  LogitDataset data(LogitMatrix(z), LabelVector({0, 1}, 3));
  EXPECT_THROW(fit_affine_logit(data, AffineMode::kMatrix, {}), InvalidInput);
}

}  // namespace
}  // namespace dircal::scaling
