#include <gtest/gtest.h>

#include <cmath>

#include "core/dual_estimator.hpp"
#include "core/error.hpp"
#include "core/kde.hpp"
#include "core/models.hpp"

using namespace ppursuit;

namespace {

double kern(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// Leave-one-out by index only; the test data have no ties.
double kde_nd(const Matrix& src, const Vector& h, const Vector& q, int skip) {
  double s = 0.0;
  int n = 0;
  for (Eigen::Index i = 0; i < src.rows(); ++i) {
    if (i == skip) continue;
    double k = 1.0;
    for (Eigen::Index j = 0; j < q.size(); ++j) k *= kern((q(j) - src(i, j)) / h(j)) / h(j);
    s += k;
    ++n;
  }
  return s / n;
}

double kde_1d(const Vector& src, double h, double q, int skip) {
  double s = 0.0;
  int n = 0;
  for (Eigen::Index i = 0; i < src.size(); ++i) {
    if (i == skip) continue;
    s += kern((q - src(i)) / h) / h;
    ++n;
  }
  return s / n;
}

double sd(const Vector& v) {
  return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

// Plug-in dual value written out from scratch for equal-size samples.
double brute_pn(const DivergenceSpec& spec, const Matrix& x, const Matrix& y, const Vector& c, const Vector& a) {
  const int m = static_cast<int>(x.rows());
  Vector h(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) h(j) = sd(x.col(j)) * std::pow(m, -1.0 / (4.0 + x.cols()));
  const Vector xc = x * c, yc = y * c, xa = x * a, ya = y * a;
  const double hc = sd(xc) * std::pow(m, -0.2);
  const double ha = sd(xa) * std::pow(m, -0.2);
  double bx = 0.0, by = 0.0;
  for (int i = 0; i < m; ++i) {
    const Vector p = x.row(i).transpose();
    const double r = kde_nd(y, h, p, -1) / kde_nd(x, h, p, i) * kde_1d(xc, hc, xc(i), i) / kde_1d(yc, hc, xc(i), -1);
    bx += r * phi_prime(spec, r) - phi(spec, r);
  }
  for (int i = 0; i < m; ++i) {
    const Vector p = y.row(i).transpose();
    const double r = kde_nd(y, h, p, i) / kde_nd(x, h, p, -1) * kde_1d(xc, hc, yc(i), -1) / kde_1d(yc, hc, yc(i), i);
    const double w = kde_1d(xa, ha, ya(i), -1) / kde_1d(ya, ha, ya(i), i);
    by += phi_prime(spec, r) * w;
  }
  return by / m - bx / m;
}

DualOptions loose(bool jackknife = false) {
  DualOptions o;
  o.truncation.nu = 0.05;
  o.truncation.min_retained = 2;
  o.truncation.scale = 1e-12;
  o.floor_fraction = 0.0;
  o.jackknife = jackknife;
  o.seed = 11;
  return o;
}

Matrix draw(const ScenarioDistribution& dist, int n, std::uint64_t seed) {
  Rng rng(seed);
  return dist.draw(n, rng);
}

const ScenarioDistribution kSkewed =
    ScenarioDistribution::product({ScenarioDistribution::gumbel(0.0, 1.0), ScenarioDistribution::normal(0.0, 1.0)});
const ScenarioDistribution kGauss = ScenarioDistribution::gaussian(Vector::Zero(2), Matrix::Identity(2, 2));

}  // namespace

TEST(Truncation, ThresholdAndRetention) {
  TruncationConfig cfg;
  cfg.nu = 0.1;
  cfg.scale = 2.0;
  EXPECT_NEAR(cfg.threshold(100), 2.0 * std::pow(100.0, -0.1), 1e-15);
  Vector f(4), g(4);
  f << 0.1, 0.5, 0.9, 0.2;
  g << 0.9, 0.9, 0.05, 0.9;
  cfg.scale = 0.3 * std::pow(100.0, 0.1);
  cfg.min_retained = 2;
  const TruncationResult r = truncate_values(f, g, 100, cfg);
  EXPECT_EQ(r.kept_x, (std::vector<int>{1, 2}));
  EXPECT_EQ(r.kept_y, (std::vector<int>{0, 1, 3}));
  cfg.min_retained = 3;
  try {
    truncate_values(f, g, 100, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewRetained);
  }
}

TEST(Truncation, NuRange) {
  TruncationConfig cfg;
  cfg.nu = 1.0 / 6.0;
  EXPECT_THROW(cfg.validate(2), Error);
  cfg.nu = 0.16;
  EXPECT_NO_THROW(cfg.validate(2));
  cfg.nu = 0.0;
  EXPECT_THROW(cfg.validate(2), Error);
}

TEST(DualContext, PlugInMatchesBruteForce) {
  const Matrix x = draw(kSkewed, 40, 1);
  const Matrix y = draw(kGauss, 40, 2);
  Vector c(2), a(2);
  c << 0.8, 0.6;
  a << 1.0, 0.0;
  for (const auto& spec : {DivergenceSpec::relative_entropy(), DivergenceSpec::chi_squared(),
                           DivergenceSpec::hellinger(), DivergenceSpec::power(1.25)}) {
    const DualContext ctx(spec, x, y, loose());
    ASSERT_EQ(ctx.n(), 40);
    const double want = brute_pn(spec, x, y, c, a);
    EXPECT_NEAR(pn_m(ctx, c, a).value, want, 1e-10 * std::max(1.0, std::abs(want))) << spec.name();
    const double same = brute_pn(spec, x, y, a, a);
    EXPECT_NEAR(pn_m(ctx, a, a).value, same, 1e-10 * std::max(1.0, std::abs(same))) << spec.name();
  }
}

TEST(DualContext, FastPathTracksExact) {
  const Matrix x = draw(kSkewed, 400, 3);
  const Matrix y = draw(kGauss, 400, 4);
  const DualContext ctx(DivergenceSpec::relative_entropy(), x, y, loose());
  Vector c(2);
  c << 0.6, -0.8;
  EXPECT_NEAR(pn_m_fast(ctx, c, c), pn_m(ctx, c, c).value, 5e-3);
}

TEST(DualContext, VarianceIsSampleVarianceOfXTerms) {
  const Matrix x = draw(kSkewed, 60, 5);
  const Matrix y = draw(kGauss, 60, 6);
  const DualContext ctx(DivergenceSpec::chi_squared(), x, y, loose());
  Vector c(2);
  c << 1.0, 0.0;
  const Vector t = pn_m(ctx, c, c).per_point_x;
  const double mean = t.mean();
  EXPECT_NEAR(variance_m(ctx, c, c), (t.array() - mean).square().sum() / (t.size() - 1.0), 1e-12);
}

TEST(DualContext, ConstantTermsHaveNoVariance) {
  try {
    variance_of_terms(Vector::Constant(50, 0.37));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVariance);
  }
  Vector t = Vector::Constant(50, 0.37);
  t(3) = 0.38;
  EXPECT_GT(variance_of_terms(t), 0.0);
}

TEST(DualContext, JackknifeCombinesVersions) {
  const Matrix x = draw(kSkewed, 80, 7);
  const Matrix y = draw(kGauss, 80, 8);
  const DualContext ctx(DivergenceSpec::relative_entropy(), x, y, loose(true));
  Vector c(2);
  c << 1.0, 0.0;
  const ProjectedFactors pc = ctx.project_exact(c);
  ASSERT_TRUE(pc.half_a && pc.half_b);
  const DualTerms t = ctx.corrected_terms(&pc, &pc);
  EXPECT_TRUE(std::isfinite(t.value()));
  // Same seed, same halves.
  const DualContext again(DivergenceSpec::relative_entropy(), x, y, loose(true));
  const ProjectedFactors pc2 = again.project_exact(c);
  EXPECT_EQ(again.corrected_terms(&pc2, &pc2).value(), t.value());
  const DualContext plain(DivergenceSpec::relative_entropy(), x, y, loose(false));
  EXPECT_THROW(plain.corrected_terms(nullptr, nullptr), Error);
}

TEST(DualContext, Errors) {
  const Matrix x = draw(kSkewed, 30, 9);
  const Matrix y = draw(kGauss, 30, 10);
  EXPECT_THROW(DualContext(DivergenceSpec::l1(), x, y, loose()), Error);
  EXPECT_THROW(DualContext(DivergenceSpec::relative_entropy(), x, Matrix(y.leftCols(1)), loose()), Error);
  const DualContext ctx(DivergenceSpec::relative_entropy(), x, y, loose());
  try {
    pn_m(ctx, Vector::Zero(2), Vector::Zero(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroDirection);
  }
  DualOptions strict = loose();
  strict.truncation.scale = 1e6;
  try {
    DualContext(DivergenceSpec::relative_entropy(), x, y, strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewRetained);
  }
  DualOptions floored = loose();
  floored.floor_fraction = 1.0;
  floored.truncation.scale = 1e-3;
  const DualContext fc(DivergenceSpec::relative_entropy(), x, y, floored);
  Vector far(2);
  far << 40.0, 40.0;
  Vector e1(2);
  e1 << 1.0, 0.0;
  try {
    fc.density_ratio(e1, far);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFloorViolation);
  }
}

// With the true densities in place of every estimate, the dual value is a
// Monte Carlo estimate of Phi(g f_a / g_a, f).
TEST(DualValue, KnownDensitiesMatchQuadrature) {
  Vector shift(2);
  shift << 0.5, 0.5;
  const EllipticalModel f(Vector::Zero(2), Matrix::Identity(2, 2));
  const EllipticalModel g(shift, Matrix::Identity(2, 2));
  auto n1 = [](double t, double mu) { return kern(t - mu); };
  Vector a(2);
  a << 1.0, 0.0;
  Rng rng(12);
  const Matrix x = f.sample(60000, rng);
  const Matrix y = g.sample(60000, rng);
  for (const auto& spec : {DivergenceSpec::relative_entropy(), DivergenceSpec::hellinger(), DivergenceSpec::chi_squared()}) {
    const double dual = dual_value_with_densities(
        spec, x, y, [&](const Vector& p) { return f.density(p); }, [&](const Vector& p) { return g.density(p); },
        [&](double t) { return n1(t, 0.0); }, [&](double t) { return n1(t, 0.5); }, a);
    const double quad = divergence_quadrature(
        spec, [&](double u, double v) { return n1(u, 0.0) * n1(v, 0.5); },
        [&](double u, double v) { return n1(u, 0.0) * n1(v, 0.0); }, {{-10, 10, 40}, {-10, 10, 40}});
    // chi2 terms are quadratic in the ratio and noisier at this sample size.
    const double tol = spec.kind == DivergenceKind::kChiSquared ? 0.05 : 0.02;
    EXPECT_NEAR(dual, quad, tol * quad) << spec.name();
  }
}

TEST(Bootstrap, SeMatchesAnalyticScale) {
  DualTerms t;
  Rng rng(13);
  std::normal_distribution<double> z;
  t.x_terms.resize(400);
  t.y_terms.resize(400);
  for (int i = 0; i < 400; ++i) {
    t.x_terms(i) = z(rng);
    t.y_terms(i) = 2.0 * z(rng);
  }
  const double want = std::sqrt(1.0 / 400 + 4.0 / 400);
  EXPECT_NEAR(bootstrap_se(t, 400, 1), want, 0.15 * want);
  EXPECT_EQ(bootstrap_se(t, 50, 3), bootstrap_se(t, 50, 3));
  EXPECT_THROW(bootstrap_se(t, 1, 3), Error);
}
