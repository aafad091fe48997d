#include "core/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/models.hpp"

namespace ppursuit {

namespace {

constexpr double kInvSqrtTwoPi = 0.39894228040143267794;
constexpr double kLogSqrtTwoPi = 0.91893853320467274178;

double sample_sd(const Eigen::Ref<const Vector>& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

double log_sum_exp(const std::vector<double>& terms) {
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

double clamp_positive(double v) { return std::max(v, std::numeric_limits<double>::denorm_min()); }

}  // namespace

Vector scott_bandwidth(const Matrix& sample) {
  const auto m = sample.rows();
  const auto k = sample.cols();
  if (k < 1) fail(ErrorCode::kEmptyData, "bandwidth needs at least one column");
  if (m < 2) fail(ErrorCode::kParam, "bandwidth needs at least two observations");
  const double factor = std::pow(static_cast<double>(m), -1.0 / (4.0 + static_cast<double>(k)));
  Vector h(k);
  for (Eigen::Index l = 0; l < k; ++l) {
    const double sd = sample_sd(sample.col(l));
    if (!(sd > 0.0) || !std::isfinite(sd))
      fail(ErrorCode::kDegenerateAxis, "axis " + std::to_string(l) + " has zero spread");
    h(l) = sd * factor;
  }
  return h;
}

double scott_bandwidth(const Vector& values) {
  const Matrix column = values;
  return scott_bandwidth(column)(0);
}

// ---------------------------------------------------------------------------

Kde1d::Kde1d(Vector points, double bandwidth) : points_(std::move(points)), bandwidth_(bandwidth) {
  if (points_.size() < 1) fail(ErrorCode::kEmptyData, "kde needs at least one point");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) fail(ErrorCode::kParam, "bandwidth must be > 0");
  if (!points_.allFinite()) fail(ErrorCode::kParam, "kde points must be finite");
  sorted_ = points_;
  std::sort(sorted_.data(), sorted_.data() + sorted_.size());
}

double Kde1d::eval(double x) const {
  // Kernels beyond 9 bandwidths add less than 3e-18 of the peak each.
  const double reach = 9.0 * bandwidth_;
  const double* begin = sorted_.data();
  const double* end = begin + sorted_.size();
  const double* lo = std::lower_bound(begin, end, x - reach);
  const double* hi = std::upper_bound(lo, end, x + reach);
  if (lo == hi) return clamp_positive(std::exp(log_eval(x)));
  double s = 0.0;
  for (const double* p = lo; p != hi; ++p) {
    const double z = (x - *p) / bandwidth_;
    s += std::exp(-0.5 * z * z);
  }
  return clamp_positive(s * kInvSqrtTwoPi / (bandwidth_ * static_cast<double>(size())));
}

double Kde1d::log_eval(double x) const {
  std::vector<double> terms(static_cast<std::size_t>(size()));
  for (int i = 0; i < size(); ++i) {
    const double z = (x - points_(i)) / bandwidth_;
    terms[static_cast<std::size_t>(i)] = -0.5 * z * z;
  }
  return log_sum_exp(terms) - kLogSqrtTwoPi - std::log(bandwidth_ * static_cast<double>(size()));
}

Vector Kde1d::eval(const Vector& xs) const {
  Vector out(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) out(i) = eval(xs(i));
  return out;
}

double Kde1d::cdf(double x) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += standard_normal_cdf((x - points_(i)) / bandwidth_);
  return s / static_cast<double>(size());
}

double Kde1d::sample(Rng& rng) const {
  std::uniform_int_distribution<int> pick(0, size() - 1);
  std::normal_distribution<double> noise(0.0, bandwidth_);
  const double center = points_(pick(rng));
  return center + noise(rng);
}

// ---------------------------------------------------------------------------

KdeNd::KdeNd(Matrix points, Vector bandwidths) : points_(std::move(points)), bandwidths_(std::move(bandwidths)) {
  if (points_.rows() < 1) fail(ErrorCode::kEmptyData, "kde needs at least one point");
  if (bandwidths_.size() != points_.cols())
    fail(ErrorCode::kDimensionMismatch, "one bandwidth per axis is required");
  for (Eigen::Index l = 0; l < bandwidths_.size(); ++l)
    if (!(bandwidths_(l) > 0.0) || !std::isfinite(bandwidths_(l)))
      fail(ErrorCode::kParam, "bandwidths must be > 0");
  if (!points_.allFinite()) fail(ErrorCode::kParam, "kde points must be finite");
  scaled_ = (points_ * bandwidths_.cwiseInverse().asDiagonal()).transpose();
  log_norm_ = -static_cast<double>(dim()) * kLogSqrtTwoPi - bandwidths_.array().log().sum() -
              std::log(static_cast<double>(size()));
}

double KdeNd::log_eval(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim()) fail(ErrorCode::kDimensionMismatch, "query dimension does not match kde");
  const Vector q = x.cwiseQuotient(bandwidths_);
  std::vector<double> terms(static_cast<std::size_t>(size()));
  for (int i = 0; i < size(); ++i) terms[static_cast<std::size_t>(i)] = -0.5 * (scaled_.col(i) - q).squaredNorm();
  return log_sum_exp(terms) + log_norm_;
}

double KdeNd::eval(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim()) fail(ErrorCode::kDimensionMismatch, "query dimension does not match kde");
  const Vector q = x.cwiseQuotient(bandwidths_);
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += std::exp(-0.5 * (scaled_.col(i) - q).squaredNorm());
  const double v = s * std::exp(log_norm_);
  if (v > 1e-280) return v;
  return clamp_positive(std::exp(log_eval(x)));
}

Vector KdeNd::eval_rows(const Matrix& queries) const {
  if (queries.cols() != dim()) fail(ErrorCode::kDimensionMismatch, "query dimension does not match kde");
  Vector out(queries.rows());
  for (Eigen::Index i = 0; i < queries.rows(); ++i) out(i) = eval(queries.row(i).transpose());
  return out;
}

Kde1d project_and_fit(const Matrix& sample, const Eigen::Ref<const Vector>& a) {
  if (a.size() != sample.cols()) fail(ErrorCode::kDimensionMismatch, "direction dimension does not match sample");
  if (a.squaredNorm() == 0.0) fail(ErrorCode::kZeroDirection, "direction is zero");
  Vector proj = sample * a;
  const double h = scott_bandwidth(proj);
  return Kde1d(std::move(proj), h);
}

// ---------------------------------------------------------------------------

namespace {

struct SplitAccumulator {
  double sum_a = 0.0, sum_b = 0.0;
  double count_a = 0.0, count_b = 0.0;

  void add(bool in_a, double v) {
    if (in_a) {
      sum_a += v;
      count_a += 1.0;
    } else {
      sum_b += v;
      count_b += 1.0;
    }
  }
};

void store(SplitEstimate& out, Eigen::Index i, const SplitAccumulator& acc, double norm, bool split) {
  const double total = acc.count_a + acc.count_b;
  out.full(i) = total > 0.0 ? (acc.sum_a + acc.sum_b) / total * norm : 0.0;
  if (split) {
    out.half_a(i) = acc.count_a > 0.0 ? acc.sum_a / acc.count_a * norm : 0.0;
    out.half_b(i) = acc.count_b > 0.0 ? acc.sum_b / acc.count_b * norm : 0.0;
  }
}

SplitEstimate make_estimate(Eigen::Index n, bool split) {
  SplitEstimate out;
  out.full.resize(n);
  if (split) {
    out.half_a.resize(n);
    out.half_b.resize(n);
  }
  return out;
}

}  // namespace

SplitEstimate split_eval(const KdeNd& kde, const Matrix& queries, const std::vector<char>& in_half_a,
                         bool own_sample) {
  if (queries.cols() != kde.dim()) fail(ErrorCode::kDimensionMismatch, "query dimension does not match kde");
  const bool split = !in_half_a.empty();
  if (split && in_half_a.size() != static_cast<std::size_t>(kde.size()))
    fail(ErrorCode::kDimensionMismatch, "split mask length does not match kde size");
  // Per-source normalization without the 1/m factor.
  const double norm = std::exp(kde.log_norm() + std::log(static_cast<double>(kde.size())));
  const Matrix& src = kde.scaled_points();
  const Vector inv_h = kde.bandwidths().cwiseInverse();
  SplitEstimate out = make_estimate(queries.rows(), split);
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const Vector q = queries.row(i).transpose().cwiseProduct(inv_h);
    SplitAccumulator acc;
    for (int j = 0; j < kde.size(); ++j) {
      const double d2 = (src.col(j) - q).squaredNorm();
      if (own_sample && d2 == 0.0) continue;
      acc.add(!split || in_half_a[static_cast<std::size_t>(j)], std::exp(-0.5 * d2));
    }
    store(out, i, acc, norm, split);
  }
  return out;
}

SplitEstimate split_eval(const Kde1d& kde, const Vector& queries, const std::vector<char>& in_half_a,
                         bool own_sample) {
  const bool split = !in_half_a.empty();
  if (split && in_half_a.size() != static_cast<std::size_t>(kde.size()))
    fail(ErrorCode::kDimensionMismatch, "split mask length does not match kde size");
  const double h = kde.bandwidth();
  const double norm = kInvSqrtTwoPi / h;
  const Vector& src = kde.points();
  SplitEstimate out = make_estimate(queries.size(), split);
  for (Eigen::Index i = 0; i < queries.size(); ++i) {
    SplitAccumulator acc;
    for (int j = 0; j < kde.size(); ++j) {
      const double diff = queries(i) - src(j);
      if (own_sample && diff == 0.0) continue;
      const double z = diff / h;
      acc.add(!split || in_half_a[static_cast<std::size_t>(j)], std::exp(-0.5 * z * z));
    }
    store(out, i, acc, norm, split);
  }
  return out;
}

// ---------------------------------------------------------------------------

BinnedKde1d::BinnedKde1d(const Vector& sources, double bandwidth, double lo, double hi) {
  if (!(bandwidth > 0.0)) fail(ErrorCode::kParam, "bandwidth must be > 0");
  constexpr int kMaxCells = 8192;
  constexpr double kReach = 7.0;
  step_ = bandwidth / 10.0;
  if (!(hi > lo)) hi = lo + step_;
  int cells = static_cast<int>(std::ceil((hi - lo) / step_)) + 1;
  if (cells > kMaxCells) {
    step_ = (hi - lo) / (kMaxCells - 1);
    cells = kMaxCells;
  }
  cells = std::max(cells, 2);
  lo_ = lo;
  count_ = static_cast<double>(sources.size());
  sources_ = sources;
  bandwidth_ = bandwidth;

  std::vector<double> counts(static_cast<std::size_t>(cells), 0.0);
  for (Eigen::Index i = 0; i < sources.size(); ++i) {
    const double t = (sources(i) - lo_) / step_;
    int j = static_cast<int>(std::floor(t));
    j = std::clamp(j, 0, cells - 2);
    const double frac = std::clamp(t - j, 0.0, 1.0);
    counts[static_cast<std::size_t>(j)] += 1.0 - frac;
    counts[static_cast<std::size_t>(j) + 1] += frac;
  }

  const int reach = std::min(cells - 1, static_cast<int>(std::ceil(kReach * bandwidth / step_)));
  const double norm = kInvSqrtTwoPi / (bandwidth * count_);
  std::vector<double> kernel(static_cast<std::size_t>(reach) + 1);
  for (int k = 0; k <= reach; ++k) {
    const double z = k * step_ / bandwidth;
    kernel[static_cast<std::size_t>(k)] = std::exp(-0.5 * z * z) * norm;
  }
  self_kernel_ = kInvSqrtTwoPi / bandwidth;

  grid_.assign(static_cast<std::size_t>(cells), 0.0);
  for (int j = 0; j < cells; ++j) {
    const double c = counts[static_cast<std::size_t>(j)];
    if (c == 0.0) continue;
    const int from = std::max(0, j - reach);
    const int to = std::min(cells - 1, j + reach);
    for (int i = from; i <= to; ++i) grid_[static_cast<std::size_t>(i)] += c * kernel[static_cast<std::size_t>(std::abs(i - j))];
  }
}

double BinnedKde1d::interpolate(double x) const {
  const double t = (x - lo_) / step_;
  const int cells = static_cast<int>(grid_.size());
  if (t <= 0.0) return grid_.front();
  if (t >= cells - 1) return grid_.back();
  const int j = static_cast<int>(t);
  const double frac = t - j;
  return grid_[static_cast<std::size_t>(j)] * (1.0 - frac) + grid_[static_cast<std::size_t>(j) + 1] * frac;
}

double BinnedKde1d::exact_sum(double x, bool skip_ties) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < sources_.size(); ++i) {
    if (skip_ties && sources_(i) == x) continue;
    const double z = (x - sources_(i)) / bandwidth_;
    s += std::exp(-0.5 * z * z);
  }
  return s * self_kernel_;
}

double BinnedKde1d::eval(double x) const {
  const double v = interpolate(x);
  if (v * count_ >= kSparse * self_kernel_) return v;
  return exact_sum(x, false) / count_;
}

double BinnedKde1d::eval_excluding(double x, double multiplicity) const {
  if (count_ <= multiplicity) return 0.0;
  const double rest = interpolate(x) * count_ - multiplicity * self_kernel_;
  if (rest >= kSparse * self_kernel_) return rest / (count_ - multiplicity);
  return exact_sum(x, multiplicity > 0.0) / (count_ - multiplicity);
}

}  // namespace ppursuit
