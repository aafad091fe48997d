#include "core/dual_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/error.hpp"
#include "core/stats.hpp"

namespace ppursuit {

namespace {

constexpr double kInvSqrtTwoPi = 0.39894228040143267794;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<char> random_half(int m, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = m - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<char> in_a(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m / 2; ++i) in_a[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  return in_a;
}

Vector gather(const Vector& v, const std::vector<int>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  return out;
}

Vector multiplicities(const Matrix& all, const std::vector<int>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto row = all.row(idx[i]);
    double count = 0.0;
    for (Eigen::Index j = 0; j < all.rows(); ++j)
      if ((all.row(j).array() == row.array()).all()) count += 1.0;
    out(static_cast<Eigen::Index>(i)) = count;
  }
  return out;
}

bool usable(double v) { return v > 0.0 && std::isfinite(v); }

void check_direction(const Eigen::Ref<const Vector>& c, int d) {
  if (c.size() != d) fail(ErrorCode::kDimensionMismatch, "direction dimension does not match data");
  if (c.squaredNorm() == 0.0) fail(ErrorCode::kZeroDirection, "direction is zero");
}

Vector compact(const Vector& raw) {
  int count = 0;
  for (Eigen::Index i = 0; i < raw.size(); ++i)
    if (!std::isnan(raw(i))) ++count;
  Vector out(count);
  int k = 0;
  for (Eigen::Index i = 0; i < raw.size(); ++i)
    if (!std::isnan(raw(i))) out(k++) = raw(i);
  return out;
}

struct RawTerms {
  Vector x;  // NaN where masked
  Vector y;
};

}  // namespace

void TruncationConfig::validate(int d) const {
  const double upper = 1.0 / (4.0 + d);
  if (!(nu > 0.0 && nu < upper))
    fail(ErrorCode::kParam, "truncation nu must lie in (0, " + std::to_string(upper) + ") for d = " + std::to_string(d));
  if (min_retained < 2) fail(ErrorCode::kParam, "min_retained must be >= 2");
  if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorCode::kParam, "truncation scale must be > 0");
}

double TruncationConfig::threshold(int m) const { return scale * std::pow(static_cast<double>(m), -nu); }

TruncationResult truncate_values(const Vector& f_at_x, const Vector& g_at_y, int m, const TruncationConfig& cfg) {
  if (m < 2) fail(ErrorCode::kParam, "truncation needs m >= 2");
  TruncationResult out;
  out.theta = cfg.threshold(m);
  for (Eigen::Index i = 0; i < f_at_x.size(); ++i)
    if (f_at_x(i) >= out.theta) out.kept_x.push_back(static_cast<int>(i));
  for (Eigen::Index i = 0; i < g_at_y.size(); ++i)
    if (g_at_y(i) >= out.theta) out.kept_y.push_back(static_cast<int>(i));
  const auto kept = std::min(out.kept_x.size(), out.kept_y.size());
  if (kept < static_cast<std::size_t>(cfg.min_retained))
    fail(ErrorCode::kTooFewRetained, "truncation kept " + std::to_string(out.kept_x.size()) + " data and " +
                                         std::to_string(out.kept_y.size()) + " instrumental points; need " +
                                         std::to_string(cfg.min_retained));
  return out;
}

TruncationResult truncate(const Matrix& sample_x, const Matrix& sample_y, const KdeNd& f_kde,
                          const std::function<double(const Vector&)>& g_side, const TruncationConfig& cfg) {
  cfg.validate(static_cast<int>(sample_x.cols()));
  const Vector fx = f_kde.eval_rows(sample_x);
  Vector gy(sample_y.rows());
  for (Eigen::Index i = 0; i < sample_y.rows(); ++i) gy(i) = g_side(sample_y.row(i).transpose());
  return truncate_values(fx, gy, static_cast<int>(sample_x.rows()), cfg);
}

// ---------------------------------------------------------------------------

DualContext::DualContext(DivergenceSpec spec, Matrix data_x, Matrix data_y, const DualOptions& options)
    : spec_(spec), data_x_(std::move(data_x)), data_y_(std::move(data_y)), options_(options) {
  spec_.validate();
  if (!spec_.differentiable()) fail(ErrorCode::kParam, "the " + spec_.name() + " divergence cannot drive the dual estimator");
  if (data_x_.cols() != data_y_.cols()) fail(ErrorCode::kDimensionMismatch, "data and instrumental samples differ in dimension");
  if (data_x_.rows() < 2 || data_y_.rows() < 2) fail(ErrorCode::kParam, "samples need at least two points");
  options_.truncation.validate(dim());
  if (!(options_.floor_fraction >= 0.0)) fail(ErrorCode::kParam, "floor_fraction must be >= 0");

  const Vector h = scott_bandwidth(data_x_);
  f_kde_ = KdeNd(data_x_, h);
  g_kde_ = KdeNd(data_y_, h);

  if (options_.jackknife) {
    Rng rng(derive_seed(options_.seed, 1));
    half_x_ = random_half(data_size(), rng);
    half_y_ = random_half(instrumental_size(), rng);
  }

  const SplitEstimate fx_all = split_eval(f_kde_, data_x_, half_x_, true);
  const SplitEstimate gy_all = split_eval(g_kde_, data_y_, half_y_, true);
  truncation_ = truncate_values(fx_all.full, gy_all.full, data_size(), options_.truncation);
  const auto n = std::min(truncation_.kept_x.size(), truncation_.kept_y.size());
  x_index_.assign(truncation_.kept_x.begin(), truncation_.kept_x.begin() + static_cast<std::ptrdiff_t>(n));
  y_index_.assign(truncation_.kept_y.begin(), truncation_.kept_y.begin() + static_cast<std::ptrdiff_t>(n));
  mult_x_ = multiplicities(data_x_, x_index_);
  mult_y_ = multiplicities(data_y_, y_index_);

  const Matrix xr = gather_rows(data_x_, x_index_);
  const Matrix yr = gather_rows(data_y_, y_index_);
  const SplitEstimate gx = split_eval(g_kde_, xr, half_y_, false);
  const SplitEstimate fy = split_eval(f_kde_, yr, half_x_, false);
  joint_full_ = {gather(fx_all.full, x_index_), gx.full, fy.full, gather(gy_all.full, y_index_)};
  if (options_.jackknife) {
    joint_a_ = FactorValues{gather(fx_all.half_a, x_index_), gx.half_a, fy.half_a, gather(gy_all.half_a, y_index_)};
    joint_b_ = FactorValues{gather(fx_all.half_b, x_index_), gx.half_b, fy.half_b, gather(gy_all.half_b, y_index_)};
  }
}

double DualContext::floor_1d(const Vector& data_projection) const {
  const double sd = std::sqrt(sample_variance(data_projection));
  if (!(sd > 0.0)) fail(ErrorCode::kDegenerateAxis, "projected data have zero spread");
  return options_.floor_fraction * std::pow(static_cast<double>(data_size()), -options_.truncation.nu) * kInvSqrtTwoPi / sd;
}

ProjectedFactors DualContext::project_exact(const Eigen::Ref<const Vector>& c) const {
  check_direction(c, dim());
  Vector px = data_x_ * c;
  Vector py = data_y_ * c;
  const double h = scott_bandwidth(px);
  const Vector pxr = gather(px, x_index_);
  const Vector pyr = gather(py, y_index_);
  ProjectedFactors out;
  out.floor = floor_1d(px);
  const Kde1d fc(std::move(px), h);
  const Kde1d gc(std::move(py), h);
  const SplitEstimate fx = split_eval(fc, pxr, half_x_, true);
  const SplitEstimate gx = split_eval(gc, pxr, half_y_, false);
  const SplitEstimate fy = split_eval(fc, pyr, half_x_, false);
  const SplitEstimate gy = split_eval(gc, pyr, half_y_, true);
  out.full = {fx.full, gx.full, fy.full, gy.full};
  if (options_.jackknife) {
    out.half_a = FactorValues{fx.half_a, gx.half_a, fy.half_a, gy.half_a};
    out.half_b = FactorValues{fx.half_b, gx.half_b, fy.half_b, gy.half_b};
  }
  return out;
}

ProjectedFactors DualContext::project_fast(const Eigen::Ref<const Vector>& c) const {
  check_direction(c, dim());
  const Vector px = data_x_ * c;
  const Vector py = data_y_ * c;
  const double h = scott_bandwidth(px);
  const double lo = std::min(px.minCoeff(), py.minCoeff());
  const double hi = std::max(px.maxCoeff(), py.maxCoeff());
  const BinnedKde1d fc(px, h, lo, hi);
  const BinnedKde1d gc(py, h, lo, hi);
  const auto n = static_cast<Eigen::Index>(x_index_.size());
  ProjectedFactors out;
  out.floor = floor_1d(px);
  FactorValues& v = out.full;
  v.fx.resize(n);
  v.gx.resize(n);
  v.fy.resize(n);
  v.gy.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = px(x_index_[static_cast<std::size_t>(i)]);
    const double yi = py(y_index_[static_cast<std::size_t>(i)]);
    v.fx(i) = fc.eval_excluding(xi, mult_x_(i));
    v.gx(i) = gc.eval(xi);
    v.fy(i) = fc.eval(yi);
    v.gy(i) = gc.eval_excluding(yi, mult_y_(i));
  }
  return out;
}

namespace {

// theta floors the d-dim own-sample densities, which matters for the halves:
// isolated points there get near-zero estimates and heavy-tailed ratios.
RawTerms raw_terms(const DivergenceSpec& spec, const FactorValues& joint, double theta, const FactorValues* c,
                   double c_floor, const FactorValues* a, double a_floor) {
  const auto n = joint.fx.size();
  RawTerms out{Vector::Constant(n, kNaN), Vector::Constant(n, kNaN)};
  for (Eigen::Index i = 0; i < n; ++i) {
    bool ok = usable(joint.fx(i)) && usable(joint.gx(i)) && joint.fx(i) >= theta;
    double r = ok ? joint.gx(i) / joint.fx(i) : 0.0;
    if (ok && c) {
      ok = usable(c->fx(i)) && usable(c->gx(i)) && c->fx(i) >= c_floor && c->gx(i) >= c_floor;
      if (ok) r *= c->fx(i) / c->gx(i);
    }
    if (ok && usable(r)) out.x(i) = eval_phi(spec, r).conjugate_term;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    bool ok = usable(joint.fy(i)) && usable(joint.gy(i)) && joint.gy(i) >= theta;
    double r = ok ? joint.gy(i) / joint.fy(i) : 0.0;
    if (ok && c) {
      ok = usable(c->fy(i)) && usable(c->gy(i)) && c->fy(i) >= c_floor && c->gy(i) >= c_floor;
      if (ok) r *= c->fy(i) / c->gy(i);
    }
    double w = 1.0;
    if (ok && a) {
      ok = usable(a->fy(i)) && usable(a->gy(i)) && a->fy(i) >= a_floor && a->gy(i) >= a_floor;
      if (ok) w = a->fy(i) / a->gy(i);
    }
    if (ok && usable(r)) out.y(i) = phi_prime(spec, r) * w;
  }
  return out;
}

DualTerms finish(const RawTerms& raw, int min_retained) {
  DualTerms out;
  out.x_terms = compact(raw.x);
  out.y_terms = compact(raw.y);
  out.masked_x = static_cast<int>(raw.x.size() - out.x_terms.size());
  out.masked_y = static_cast<int>(raw.y.size() - out.y_terms.size());
  const int need = std::max(2, std::min(min_retained, static_cast<int>(raw.x.size())));
  if (out.x_terms.size() < need || out.y_terms.size() < need)
    fail(ErrorCode::kTooFewRetained, "too many points fall below the projected density floor");
  return out;
}

}  // namespace

DualTerms DualContext::terms(const ProjectedFactors* c, const ProjectedFactors* a) const {
  const RawTerms raw = raw_terms(spec_, joint_full_, theta(), c ? &c->full : nullptr, c ? c->floor : 0.0,
                                 a ? &a->full : nullptr, a ? a->floor : 0.0);
  return finish(raw, options_.truncation.min_retained);
}

DualTerms DualContext::corrected_terms(const ProjectedFactors* c, const ProjectedFactors* a) const {
  if (!options_.jackknife || !joint_a_ || !joint_b_)
    fail(ErrorCode::kParam, "bias-corrected terms need a context built with jackknife halves");
  if ((c && (!c->half_a || !c->half_b)) || (a && (!a->half_a || !a->half_b)))
    fail(ErrorCode::kParam, "bias-corrected terms need exact projected factors with halves");
  auto pick = [](const ProjectedFactors* p, int which) -> const FactorValues* {
    if (!p) return nullptr;
    return which == 0 ? &p->full : which == 1 ? &*p->half_a : &*p->half_b;
  };
  const double cf = c ? c->floor : 0.0;
  const double af = a ? a->floor : 0.0;
  const RawTerms full = raw_terms(spec_, joint_full_, theta(), pick(c, 0), cf, pick(a, 0), af);
  const RawTerms ha = raw_terms(spec_, *joint_a_, theta(), pick(c, 1), cf, pick(a, 1), af);
  const RawTerms hb = raw_terms(spec_, *joint_b_, theta(), pick(c, 2), cf, pick(a, 2), af);
  // NaN from any version propagates and masks the point.
  RawTerms out{2.0 * full.x - 0.5 * (ha.x + hb.x), 2.0 * full.y - 0.5 * (ha.y + hb.y)};
  return finish(out, options_.truncation.min_retained);
}

double DualContext::density_ratio(const Eigen::Ref<const Vector>& b, const Eigen::Ref<const Vector>& x) const {
  check_direction(b, dim());
  if (x.size() != dim()) fail(ErrorCode::kDimensionMismatch, "point dimension does not match data");
  Vector px = data_x_ * b;
  Vector py = data_y_ * b;
  const double h = scott_bandwidth(px);
  const double floor = floor_1d(px);
  const Kde1d fb(std::move(px), h);
  const Kde1d gb(std::move(py), h);
  const double t = b.dot(x);
  const double f = f_kde_.eval(x);
  const double g = g_kde_.eval(x);
  const double fp = fb.eval(t);
  const double gp = gb.eval(t);
  if (f < theta()) fail(ErrorCode::kFloorViolation, "data density estimate below the truncation floor");
  if (!usable(g)) fail(ErrorCode::kFloorViolation, "instrumental density estimate vanishes");
  if (fp < floor || gp < floor) fail(ErrorCode::kFloorViolation, "projected density estimate below the floor");
  return g * fp / (f * gp);
}

// ---------------------------------------------------------------------------

PnM pn_m(const DualContext& ctx, const Eigen::Ref<const Vector>& c, const Eigen::Ref<const Vector>& a) {
  const ProjectedFactors pc = ctx.project_exact(c);
  const bool same = c.size() == a.size() && c == a;
  const ProjectedFactors pa = same ? ProjectedFactors{} : ctx.project_exact(a);
  const DualTerms t = ctx.terms(&pc, same ? &pc : &pa);
  return {t.value(), t.x_terms};
}

double pn_m_fast(const DualContext& ctx, const Eigen::Ref<const Vector>& c, const Eigen::Ref<const Vector>& a) {
  const ProjectedFactors pc = ctx.project_fast(c);
  const bool same = c.size() == a.size() && c == a;
  const ProjectedFactors pa = same ? ProjectedFactors{} : ctx.project_fast(a);
  return ctx.terms(&pc, same ? &pc : &pa).value();
}

double variance_of_terms(const Vector& terms) {
  const double var = sample_variance(terms);
  const double scale = std::max(1.0, terms.cwiseAbs().maxCoeff());
  if (!(var > 1e-26 * scale * scale)) fail(ErrorCode::kZeroVariance, "per-point contributions are all identical");
  return var;
}

double variance_m(const DualContext& ctx, const Eigen::Ref<const Vector>& c, const Eigen::Ref<const Vector>& a) {
  return variance_of_terms(pn_m(ctx, c, a).per_point_x);
}

double bootstrap_se(const DualTerms& terms, int replicates, std::uint64_t seed) {
  if (replicates < 2) fail(ErrorCode::kParam, "bootstrap needs at least two replicates");
  Rng rng(seed);
  const auto nx = static_cast<int>(terms.x_terms.size());
  const auto ny = static_cast<int>(terms.y_terms.size());
  std::uniform_int_distribution<int> pick_x(0, nx - 1);
  std::uniform_int_distribution<int> pick_y(0, ny - 1);
  Vector values(replicates);
  for (int b = 0; b < replicates; ++b) {
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < nx; ++i) sx += terms.x_terms(pick_x(rng));
    for (int i = 0; i < ny; ++i) sy += terms.y_terms(pick_y(rng));
    values(b) = sy / ny - sx / nx;
  }
  return std::sqrt(sample_variance(values));
}

double dual_value_with_densities(const DivergenceSpec& spec, const Matrix& x, const Matrix& y, const DensityNd& f,
                                 const DensityNd& g, const std::function<double(double)>& f_a,
                                 const std::function<double(double)>& g_a, const Eigen::Ref<const Vector>& a) {
  if (x.cols() != a.size() || y.cols() != a.size()) fail(ErrorCode::kDimensionMismatch, "samples and direction differ in dimension");
  if (x.rows() == 0 || y.rows() == 0) fail(ErrorCode::kEmptyData, "samples are empty");
  auto ratio = [&](const Vector& p) {
    const double t = a.dot(p);
    return g(p) * f_a(t) / (f(p) * g_a(t));
  };
  double sum_y = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const Vector p = y.row(i).transpose();
    const double t = a.dot(p);
    sum_y += phi_prime(spec, ratio(p)) * f_a(t) / g_a(t);
  }
  double sum_x = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) sum_x += eval_phi(spec, ratio(x.row(i).transpose())).conjugate_term;
  return sum_y / static_cast<double>(y.rows()) - sum_x / static_cast<double>(x.rows());
}

}  // namespace ppursuit
