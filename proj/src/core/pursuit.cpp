#include "core/pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/stats.hpp"

namespace ppursuit {

namespace {

// Seed streams; every stochastic stage of level k draws from its own stream.
enum Stream : std::uint64_t {
  kInstrumentalStream = 100,
  kHalvesStream = 200,
  kAnnealStream = 300,
  kSearchStream = 400,
  kBootstrapStream = 500,
};

std::uint64_t stream_seed(std::uint64_t seed, Stream stream, int k) {
  return derive_seed(seed, static_cast<std::uint64_t>(stream) + static_cast<std::uint64_t>(k));
}

double safe_log(const Kde1d& kde, double t) {
  const double v = kde.eval(t);
  return v > 1e-290 ? std::log(v) : kde.log_eval(t);
}

LevelDiagnostics context_diagnostics(const DualContext& ctx, const DualTerms& terms) {
  LevelDiagnostics d;
  d.instrumental_size = ctx.instrumental_size();
  d.retained_x = static_cast<int>(ctx.truncation().kept_x.size());
  d.retained_y = static_cast<int>(ctx.truncation().kept_y.size());
  d.paired_n = ctx.n();
  d.masked_x = terms.masked_x;
  d.masked_y = terms.masked_y;
  d.theta = ctx.theta();
  return d;
}

}  // namespace

void PursuitModel::add_level(PursuitLevel level) {
  if (level.direction.size() != dim()) fail(ErrorCode::kDimensionMismatch, "level direction has wrong length");
  levels_.push_back(std::move(level));
}

PursuitModel PursuitModel::prefix(int k) const {
  PursuitModel out(base_);
  for (int j = 0; j < std::min(k, this->k()); ++j) out.levels_.push_back(levels_[static_cast<std::size_t>(j)]);
  return out;
}

double log_eval_gk(const PursuitModel& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.dim()) fail(ErrorCode::kDimensionMismatch, "point dimension does not match model");
  double out = model.base().log_density(x);
  for (const auto& level : model.levels()) {
    const double t = level.direction.dot(x);
    out += safe_log(level.numerator, t) - safe_log(level.denominator, t);
  }
  return out;
}

double eval_gk(const PursuitModel& model, const Eigen::Ref<const Vector>& x) {
  return std::exp(log_eval_gk(model, x));
}

GkSample sample_gk(const PursuitModel& model, int n, std::uint64_t seed, const SampleOptions& options) {
  if (n < 1) fail(ErrorCode::kParam, "sample size must be >= 1");
  if (options.proposal_factor < 1) fail(ErrorCode::kParam, "proposal factor must be >= 1");
  Rng rng(seed);
  GkSample out;
  const int k = model.k();
  if (k == 0) {
    out.sample = model.base().sample(n, rng);
    out.ess = n;
    out.proposals = n;
    return out;
  }

  // Level 1 by conditional replacement: shift each Gaussian draw along
  // Sigma a so that a'Y takes a value drawn from the numerator KDE.
  const int proposals = k == 1 ? n : options.proposal_factor * n;
  const PursuitLevel& first = model.levels().front();
  const Vector& a = first.direction;
  const Vector shift = model.base().sigma() * a;
  const double scale = a.dot(shift);
  Matrix y = model.base().sample(proposals, rng);
  for (int i = 0; i < proposals; ++i) {
    const double t = first.numerator.sample(rng);
    y.row(i) += ((t - y.row(i).dot(a)) / scale) * shift.transpose();
  }
  if (k == 1) {
    out.sample = std::move(y);
    out.ess = n;
    out.proposals = n;
    return out;
  }

  // Later levels by sampling-importance-resampling.
  Vector log_w = Vector::Zero(proposals);
  for (std::size_t j = 1; j < model.levels().size(); ++j) {
    const PursuitLevel& level = model.levels()[j];
    for (int i = 0; i < proposals; ++i) {
      const double t = y.row(i).dot(level.direction);
      log_w(i) += safe_log(level.numerator, t) - safe_log(level.denominator, t);
    }
  }
  const double top = log_w.maxCoeff();
  const Vector w = (log_w.array() - top).exp().matrix();
  const double sum = w.sum();
  out.ess = sum * sum / w.squaredNorm();
  out.proposals = proposals;
  if (!(out.ess >= n / 10.0))
    fail(ErrorCode::kDegenerateWeights, "importance weights degenerate: ESS " + std::to_string(out.ess) +
                                            " below n/10 = " + std::to_string(n / 10.0));
  std::vector<double> cumulative(static_cast<std::size_t>(proposals));
  double running = 0.0;
  for (int i = 0; i < proposals; ++i) {
    running += w(i);
    cumulative[static_cast<std::size_t>(i)] = running;
  }
  std::uniform_real_distribution<double> unif(0.0, running);
  out.sample.resize(n, model.dim());
  for (int i = 0; i < n; ++i) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), unif(rng));
    const auto idx = std::min<std::ptrdiff_t>(it - cumulative.begin(), proposals - 1);
    out.sample.row(i) = y.row(idx);
  }
  return out;
}

// ---------------------------------------------------------------------------

PursuitConfig PursuitConfig::resolved(int d, int m) const {
  PursuitConfig out = *this;
  if (out.max_k < 0) out.max_k = d;
  if (out.truncation.nu <= 0.0) out.truncation.nu = 0.5 / (4.0 + d);
  if (out.instrumental_sample_size <= 0) out.instrumental_sample_size = m;
  out.validate(d);
  return out;
}

void PursuitConfig::validate(int d) const {
  spec.validate();
  if (!spec.differentiable()) fail(ErrorCode::kParam, "the " + spec.name() + " divergence cannot drive the pursuit");
  if (max_k < 0) fail(ErrorCode::kParam, "max_k must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::kParam, "alpha must lie in (0, 1)");
  truncation.validate(d);
  if (!(floor_fraction > 0.0) || !std::isfinite(floor_fraction)) fail(ErrorCode::kParam, "floor_fraction must be > 0");
  anneal.validate();
  if (instrumental_sample_size < d + 1) fail(ErrorCode::kParam, "instrumental sample size must be >= d + 1");
  if (bootstrap_replicates < 2) fail(ErrorCode::kParam, "bootstrap replicates must be >= 2");
  if (!(search_fraction > 0.0 && search_fraction <= 1.0)) fail(ErrorCode::kParam, "search fraction must lie in (0, 1]");
  if (!(search_radius_deg > 0.0 && search_radius_deg <= 90.0))
    fail(ErrorCode::kParam, "search radius must lie in (0, 90] degrees");
  if (proposal_factor < 1) fail(ErrorCode::kParam, "proposal factor must be >= 1");
}

DualOptions dual_options(const PursuitConfig& cfg, const EllipticalModel& base, std::uint64_t seed) {
  DualOptions out;
  out.truncation = cfg.truncation;
  out.truncation.scale = cfg.floor_fraction * base.peak_density();
  out.floor_fraction = cfg.floor_fraction;
  out.jackknife = true;
  out.seed = seed;
  return out;
}

StoppingConfig stopping_config(const PursuitConfig& cfg, std::uint64_t seed) {
  StoppingConfig out;
  out.alpha = cfg.alpha;
  out.paper_threshold = cfg.paper_threshold;
  out.search = cfg.anneal;
  out.search.steps = std::max(1, static_cast<int>(std::lround(cfg.anneal.steps * cfg.search_fraction)));
  out.search.restarts = 1;
  out.search.seed = seed;
  out.search_radius = cfg.search_radius_deg * kPi / 180.0;
  return out;
}

DualContext level_context(const PursuitModel& model, const Matrix& data, const PursuitConfig& cfg, int k,
                          GkSample* instrumental) {
  if (model.k() != std::max(k - 1, 0)) fail(ErrorCode::kParam, "level context expects a model with k - 1 levels");
  if (data.cols() != model.dim()) fail(ErrorCode::kDimensionMismatch, "data dimension does not match model");
  GkSample ys = sample_gk(model, cfg.instrumental_sample_size, stream_seed(cfg.seed, kInstrumentalStream, k),
                          {cfg.proposal_factor});
  DualContext ctx(cfg.spec, data, ys.sample,
                  dual_options(cfg, model.base(), stream_seed(cfg.seed, kHalvesStream, k)));
  if (instrumental) *instrumental = std::move(ys);
  return ctx;
}

PursuitLevel pursuit_step(const PursuitModel& model, const Matrix& data, const PursuitConfig& cfg, int k) {
  if (model.k() != k - 1) fail(ErrorCode::kParam, "pursuit_step expects a model with k - 1 levels");
  const int d = model.dim();

  GkSample ys;
  const DualContext ctx = level_context(model, data, cfg, k, &ys);

  auto objective = [&ctx](const Vector& a) {
    try {
      const ProjectedFactors p = ctx.project_fast(a);
      return ctx.terms(&p, &p).value();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  AnnealConfig anneal = cfg.anneal;
  anneal.seed = stream_seed(cfg.seed ^ cfg.anneal.seed, kAnnealStream, k);
  AnnealOptions opts;
  opts.record_trace = false;
  const AnnealResult best = anneal_minimize(objective, d, anneal, opts);

  PursuitLevel level;
  level.direction = best.best;
  const ProjectedFactors p = ctx.project_exact(level.direction);
  const DualTerms terms = ctx.terms(&p, &p);
  level.divergence_estimate = terms.value();
  level.bootstrap_se = bootstrap_se(terms, cfg.bootstrap_replicates, stream_seed(cfg.seed, kBootstrapStream, k));
  level.numerator = project_and_fit(data, level.direction);
  Vector y_proj = ys.sample * level.direction;
  const double y_scott = scott_bandwidth(y_proj);
  level.denominator = Kde1d(std::move(y_proj), level.numerator.bandwidth());

  TestDetails details;
  level.test = stopping_test(ctx, level.direction, stopping_config(cfg, stream_seed(cfg.seed, kSearchStream, k)), k,
                             &details);

  level.diagnostics = context_diagnostics(ctx, terms);
  level.diagnostics.numerator_bandwidth = level.numerator.bandwidth();
  level.diagnostics.denominator_scott_bandwidth = y_scott;
  level.diagnostics.ess = ys.ess;
  level.diagnostics.proposals = ys.proposals;
  level.diagnostics.anneal_value = best.value;
  level.diagnostics.anneal_evaluations = best.evaluations;
  level.diagnostics.test_estimate = details.estimate;
  level.diagnostics.test_c_direction = details.c_direction;
  return level;
}

PursuitResult run_pursuit(const Matrix& data, const PursuitConfig& cfg) {
  const int d = static_cast<int>(data.cols());
  const int m = static_cast<int>(data.rows());
  if (d < 1 || m < 1) fail(ErrorCode::kEmptyData, "data are empty");
  if (!data.allFinite()) fail(ErrorCode::kParam, "data contain non-finite values");
  if (m < d + 1) fail(ErrorCode::kSingularCovariance, "need at least d + 1 observations");
  const PursuitConfig config = cfg.resolved(d, m);
  PursuitResult result{config, PursuitModel(fit_instrumental(data)), {}, 0, false, {}, {}};

  try {
    GkSample ys;
    const DualContext ctx = level_context(result.model, data, config, 0, &ys);
    const DualTerms terms = ctx.terms(nullptr, nullptr);
    NullLevel& null_level = result.null_level;
    null_level.divergence_estimate = terms.value();
    null_level.bootstrap_se =
        bootstrap_se(terms, config.bootstrap_replicates, stream_seed(config.seed, kBootstrapStream, 0));
    TestDetails details;
    null_level.test = stopping_test(ctx, Vector(), stopping_config(config, 0), 0, &details);
    null_level.diagnostics = context_diagnostics(ctx, terms);
    null_level.diagnostics.ess = ys.ess;
    null_level.diagnostics.proposals = ys.proposals;
    null_level.diagnostics.test_estimate = details.estimate;
  } catch (const Error& e) {
    throw PursuitError(e, 0, std::make_shared<const PursuitResult>(result));
  }
  result.trace.push_back(result.null_level.divergence_estimate);
  result.reports.push_back(result.null_level.test);
  result.accepted = result.null_level.test.accept_h0;
  if (config.max_k == 0 || (config.stop_on_accept && result.accepted)) return result;

  for (int k = 1; k <= config.max_k; ++k) {
    PursuitLevel level;
    try {
      level = pursuit_step(result.model, data, config, k);
    } catch (const Error& e) {
      throw PursuitError(e, k, std::make_shared<const PursuitResult>(result));
    }
    result.trace.push_back(level.divergence_estimate);
    result.reports.push_back(level.test);
    result.accepted = level.test.accept_h0;
    result.model.add_level(std::move(level));
    result.stopped_at = result.model.k();
    if (config.stop_on_accept && result.accepted) break;
  }
  return result;
}

}  // namespace ppursuit
