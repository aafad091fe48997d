#pragma once

#include "core/dual_estimator.hpp"
#include "core/optimizer.hpp"

namespace ppursuit {

// accept_h0 <=> |statistic| <= quantile. `direction` is empty for the
// level-0 test of the bare instrumental fit.
struct TestReport {
  double statistic = 0.0;
  double variance = 0.0;
  double p_value = 1.0;
  double quantile = 0.0;
  bool accept_h0 = true;
  Vector direction;
  int level_index = 0;
};

struct StoppingConfig {
  double alpha = 0.1;
  // Use the constant 0.2533 (standard normal 0.6 quantile) as the threshold.
  bool paper_threshold = false;
  // Local search for the maximizing c around gamma.
  AnnealConfig search;
  double search_radius = 10.0 * kPi / 180.0;
  bool search_c = true;
};

// Extra numbers behind a TestReport, kept for diagnostics.
struct TestDetails {
  double estimate = 0.0;  // bias-corrected pn_m(c, gamma)
  Vector c_direction;
  int n_x = 0;
  int n_y = 0;
  double variance_x = 0.0;  // per-point sample variances
  double variance_y = 0.0;
};

double test_quantile(double alpha, bool paper_threshold);

// Statistic at (c, a) with no search: sqrt(n) * estimate / sqrt(variance),
// where variance = n (var_x / n_x + var_y / n_y). Null pointers drop factors.
TestDetails test_statistic(const DualContext& ctx, const Vector* c, const Vector* a, double* statistic,
                           double* variance);

TestReport stopping_test(const DualContext& ctx, const Vector& gamma, const StoppingConfig& cfg, int level_index,
                         TestDetails* details = nullptr);

// One-sided: statistic at (b, b) <= quantile.
bool ellipsoid_membership(const DualContext& ctx, const Vector& b, double alpha, bool paper_threshold = false);

}  // namespace ppursuit
