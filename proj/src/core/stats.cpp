#include "core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/error.hpp"

namespace ppursuit {

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double stephens_p(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
}

std::vector<double> sorted_copy(const Vector& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

KsResult ks_test(const Vector& sample, const std::function<double(double)>& cdf) {
  if (sample.size() < 1) fail(ErrorCode::kEmptyData, "KS test needs a non-empty sample");
  const auto xs = sorted_copy(sample);
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
  }
  return {d, stephens_p(d, n)};
}

KsResult ks_test_two_sample(const Vector& a, const Vector& b) {
  if (a.size() < 1 || b.size() < 1) fail(ErrorCode::kEmptyData, "KS test needs non-empty samples");
  const auto xa = sorted_copy(a);
  const auto xb = sorted_copy(b);
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double x = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] <= x) ++i;
    while (j < xb.size() && xb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, stephens_p(d, na * nb / (na + nb))};
}

double sample_variance(const Vector& v) {
  if (v.size() < 2) fail(ErrorCode::kParam, "variance needs at least two values");
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

double sample_correlation(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) fail(ErrorCode::kDimensionMismatch, "correlation needs paired values");
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  if (denom == 0.0) return 0.0;
  return std::clamp(ca.dot(cb) / denom, -1.0, 1.0);
}

}  // namespace ppursuit
