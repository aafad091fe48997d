#include "core/stopping.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/models.hpp"
#include "core/stats.hpp"

namespace ppursuit {

double test_quantile(double alpha, bool paper_threshold) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::kParam, "alpha must lie in (0, 1)");
  if (paper_threshold) return standard_normal_quantile(0.6);
  return standard_normal_quantile(1.0 - alpha / 2.0);
}

TestDetails test_statistic(const DualContext& ctx, const Vector* c, const Vector* a, double* statistic,
                           double* variance) {
  std::optional<ProjectedFactors> pc, pa;
  if (c) pc = ctx.project_exact(*c);
  if (a) {
    if (c && *c == *a)
      pa = pc;
    else
      pa = ctx.project_exact(*a);
  }
  const bool corrected = ctx.options().jackknife;
  const DualTerms t = corrected ? ctx.corrected_terms(pc ? &*pc : nullptr, pa ? &*pa : nullptr)
                                : ctx.terms(pc ? &*pc : nullptr, pa ? &*pa : nullptr);
  TestDetails out;
  out.estimate = t.value();
  out.n_x = static_cast<int>(t.x_terms.size());
  out.n_y = static_cast<int>(t.y_terms.size());
  out.variance_x = sample_variance(t.x_terms);
  out.variance_y = sample_variance(t.y_terms);
  if (c) out.c_direction = *c;
  const double per_mean = out.variance_x / out.n_x + out.variance_y / out.n_y;
  const double scale = std::max({1.0, t.x_terms.cwiseAbs().maxCoeff(), t.y_terms.cwiseAbs().maxCoeff()});
  if (!(per_mean > 1e-26 * scale * scale)) fail(ErrorCode::kZeroVariance, "test variance is zero; the test is inconclusive");
  const double n = ctx.n();
  if (statistic) *statistic = out.estimate / std::sqrt(per_mean);
  if (variance) *variance = n * per_mean;
  return out;
}

TestReport stopping_test(const DualContext& ctx, const Vector& gamma, const StoppingConfig& cfg, int level_index,
                         TestDetails* details) {
  TestReport report;
  report.level_index = level_index;
  report.quantile = test_quantile(cfg.alpha, cfg.paper_threshold);
  TestDetails d;
  if (gamma.size() == 0) {
    d = test_statistic(ctx, nullptr, nullptr, &report.statistic, &report.variance);
  } else {
    report.direction = canonicalize(gamma);
    Vector c = report.direction;
    if (cfg.search_c && ctx.dim() > 1) {
      const ProjectedFactors pa = ctx.project_fast(report.direction);
      auto objective = [&](const Vector& cand) {
        try {
          const ProjectedFactors pc = ctx.project_fast(cand);
          return -ctx.terms(&pc, &pa).value();
        } catch (const Error&) {
          return std::numeric_limits<double>::infinity();
        }
      };
      AnnealOptions opts;
      opts.start = report.direction;
      opts.max_angle = cfg.search_radius;
      opts.record_trace = false;
      AnnealConfig search = cfg.search;
      search.restarts = 1;
      c = anneal_minimize(objective, ctx.dim(), search, opts).best;
    }
    d = test_statistic(ctx, &c, &report.direction, &report.statistic, &report.variance);
  }
  report.p_value = std::erfc(std::abs(report.statistic) / std::sqrt(2.0));
  report.accept_h0 = std::abs(report.statistic) <= report.quantile;
  if (details) *details = d;
  return report;
}

bool ellipsoid_membership(const DualContext& ctx, const Vector& b, double alpha, bool paper_threshold) {
  const Vector dir = canonicalize(b);
  double statistic = 0.0;
  test_statistic(ctx, &dir, &dir, &statistic, nullptr);
  return statistic <= test_quantile(alpha, paper_threshold);
}

}  // namespace ppursuit
