#include <gtest/gtest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/inference.hpp"
#include "core/models.hpp"
#include "core/pursuit.hpp"
#include "core/stopping.hpp"

using namespace ppursuit;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return static_cast<ErrorCode>(-1);
}

DualContext null_context(int m, std::uint64_t seed) {
  const EllipticalModel g(Vector::Zero(2), Matrix::Identity(2, 2));
  Rng rng(seed);
  Matrix x = g.sample(m, rng);
  Matrix y = g.sample(m, rng);
  DualOptions o;
  o.truncation.nu = 0.5 / 6.0;
  o.truncation.scale = 1e-3 * g.peak_density();
  o.seed = seed;
  return DualContext(DivergenceSpec::relative_entropy(), std::move(x), std::move(y), o);
}

PursuitLevel bare_level(const Vector& dir) {
  PursuitLevel l;
  l.direction = dir;
  l.numerator = Kde1d(Vector::LinSpaced(5, -1.0, 1.0), 0.5);
  l.denominator = l.numerator;
  return l;
}

}  // namespace

TEST(Quantile, NormalValues) {
  EXPECT_NEAR(test_quantile(0.1, false), 1.6448536269514722, 1e-9);
  EXPECT_NEAR(test_quantile(0.05, false), 1.959963984540054, 1e-9);
  EXPECT_NEAR(test_quantile(0.1, true), 0.2533471031357997, 1e-9);
  EXPECT_THROW(test_quantile(0.0, false), Error);
  EXPECT_THROW(test_quantile(1.0, false), Error);
}

TEST(StoppingTest, PValueAndAcceptRule) {
  const DualContext ctx = null_context(400, 3);
  Vector gamma(2);
  gamma << 1.0, 1.0;
  StoppingConfig cfg;
  cfg.search.steps = 60;
  TestDetails details;
  const TestReport r = stopping_test(ctx, gamma, cfg, 1, &details);
  EXPECT_NEAR(r.p_value, 2.0 * (1.0 - standard_normal_cdf(std::abs(r.statistic))), 1e-12);
  EXPECT_EQ(r.accept_h0, std::abs(r.statistic) <= r.quantile);
  EXPECT_NEAR(r.direction.norm(), 1.0, 1e-15);
  EXPECT_EQ(r.level_index, 1);
  EXPECT_LE(axis_angle(details.c_direction, r.direction), cfg.search_radius + 1e-12);
  EXPECT_GT(r.variance, 0.0);

  const TestReport level0 = stopping_test(ctx, Vector(), cfg, 0);
  EXPECT_EQ(level0.direction.size(), 0);
  EXPECT_TRUE(std::isfinite(level0.statistic));
}

TEST(StoppingTest, StatisticDefinition) {
  const DualContext ctx = null_context(300, 4);
  Vector b(2);
  b << 0.3, 0.9;
  double stat = 0.0, var = 0.0;
  const TestDetails d = test_statistic(ctx, &b, &b, &stat, &var);
  const double n = ctx.n();
  EXPECT_NEAR(var, n * (d.variance_x / d.n_x + d.variance_y / d.n_y), 1e-12 * var);
  EXPECT_NEAR(stat, std::sqrt(n) * d.estimate / std::sqrt(var), 1e-12 * std::max(1.0, std::abs(stat)));
}

TEST(Membership, ScaleInvariantAndOneSided) {
  const DualContext ctx = null_context(300, 5);
  Vector b(2);
  b << 0.6, -0.8;
  EXPECT_EQ(ellipsoid_membership(ctx, b, 0.1), ellipsoid_membership(ctx, Vector(7.5 * b), 0.1));
  double s1 = 0.0, s2 = 0.0;
  Vector b1 = b, b2 = 4.0 * b;
  b1.normalize();
  b2.normalize();
  test_statistic(ctx, &b1, &b1, &s1, nullptr);
  test_statistic(ctx, &b2, &b2, &s2, nullptr);
  EXPECT_NEAR(s1, s2, 1e-12);
  EXPECT_EQ(ellipsoid_membership(ctx, b, 0.1), s1 <= test_quantile(0.1, false));
}

TEST(LeastSquares, ExactLineAndClosedForm) {
  Matrix data(5, 2);
  data << 1.0, 0.0, 3.0, 1.0, 5.0, 2.0, 7.0, 3.0, 9.0, 4.0;
  const LinearFit fit = least_squares(data, 0, 1);
  EXPECT_NEAR(fit.slope, 2.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-12);
  EXPECT_NEAR(fit.correlation, 1.0, 1e-12);
  EXPECT_NEAR(fit.slope_se, 0.0, 1e-7);

  Matrix noisy(4, 2);
  noisy << 1.0, 0.0, 2.0, 1.0, 2.0, 2.0, 5.0, 3.0;
  const LinearFit f2 = least_squares(noisy, 0, 1);
  // Sxx = 5, Sxy = 6, residuals 0.3, 0.1, -1.1, 0.7 around 0.7 + 1.2 x.
  EXPECT_NEAR(f2.slope, 1.2, 1e-12);
  EXPECT_NEAR(f2.intercept, 0.7, 1e-12);
  const double s2 = (0.09 + 0.01 + 1.21 + 0.49) / 2.0;
  EXPECT_NEAR(f2.slope_se, std::sqrt(s2 / 5.0), 1e-12);
  EXPECT_NEAR(f2.intercept_se, std::sqrt(s2 * (1.0 / 4.0 + 2.25 / 5.0)), 1e-12);
}

TEST(LeastSquares, Errors) {
  Matrix flat(4, 2);
  flat << 1.0, 2.0, 2.0, 2.0, 3.0, 2.0, 4.0, 2.0;
  EXPECT_EQ(code_of([&] { least_squares(flat, 0, 1); }), ErrorCode::kDegeneratePredictor);
  EXPECT_EQ(code_of([&] { least_squares(Matrix(flat.topRows(2)), 0, 1); }), ErrorCode::kDegeneratePredictor);
  EXPECT_EQ(code_of([&] { least_squares(flat, 0, 3); }), ErrorCode::kDimensionMismatch);
}

TEST(GramSchmidt, CompletesAnOrthonormalBasis) {
  Matrix dirs(3, 1);
  dirs << 1.0, 1.0, 0.0;
  const Matrix comp = gram_schmidt_complement(dirs);
  ASSERT_EQ(comp.cols(), 2);
  EXPECT_NEAR((comp.transpose() * comp - Matrix::Identity(2, 2)).norm(), 0.0, 1e-14);
  EXPECT_NEAR((comp.transpose() * dirs).norm(), 0.0, 1e-14);
  Matrix dep(3, 2);
  dep << 1.0, 2.0, 1.0, 2.0, 0.0, 0.0;
  EXPECT_EQ(code_of([&] { gram_schmidt_complement(dep); }), ErrorCode::kBasisDegenerate);
}

TEST(DirectionRegression, MatchesGaussianConditional) {
  Matrix s(2, 2);
  s << 2.0, 0.8, 0.8, 1.0;
  Vector mu(2);
  mu << 1.0, -1.0;
  PursuitModel model{EllipticalModel(mu, s)};
  model.add_level(bare_level(Vector::Unit(2, 1)));
  const DirectionRegression r = regress_on_directions(model);
  // E(X0 | X1 = t) = mu0 + s01 / s11 (t - mu1), up to the complement's sign.
  const double sign = r.complement(0, 0) > 0 ? 1.0 : -1.0;
  EXPECT_NEAR(sign * r.conditional.slopes(0, 0), 0.8, 1e-12);
  EXPECT_NEAR(sign * r.conditional.intercept(0), 1.0 + 0.8, 1e-12);
  EXPECT_EQ(code_of([&] { regress_on_directions(PursuitModel(EllipticalModel(mu, s))); }),
            ErrorCode::kStructureMismatch);
}

TEST(Copula, NeedsFullBasis) {
  PursuitResult r{PursuitConfig{}, PursuitModel(EllipticalModel(Vector::Zero(2), Matrix::Identity(2, 2))), {}, 0, false, {}, {}};
  r.model.add_level(bare_level(Vector::Unit(2, 0)));
  EXPECT_EQ(code_of([&] { copula_from_pursuit(r); }), ErrorCode::kBasisDegenerate);
  r.model.add_level(bare_level(Vector::Unit(2, 0)));
  EXPECT_EQ(code_of([&] { copula_from_pursuit(r); }), ErrorCode::kBasisDegenerate);
}
