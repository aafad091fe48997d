#include "core/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace ppursuit {

namespace {

constexpr double kPenalty = 1e300;

double guarded(const DirectionObjective& objective, const Vector& a) {
  const double v = objective(a);
  return std::isfinite(v) ? v : kPenalty;
}

Vector random_direction(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-8);
  return canonicalize(v);
}

bool lexicographically_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

}  // namespace

void AnnealConfig::validate() const {
  if (steps < 1) fail(ErrorCode::kParam, "anneal steps must be >= 1");
  if (restarts < 1) fail(ErrorCode::kParam, "anneal restarts must be >= 1");
  if (!(initial_temperature > 0.0)) fail(ErrorCode::kParam, "initial temperature must be > 0");
  if (!(cooling_factor > 0.0 && cooling_factor < 1.0)) fail(ErrorCode::kParam, "cooling factor must lie in (0, 1)");
  if (!(proposal_stddev > 0.0)) fail(ErrorCode::kParam, "proposal stddev must be > 0");
}

Vector canonicalize(const Eigen::Ref<const Vector>& v) {
  const double norm = v.norm();
  if (v.size() == 0 || !(norm > 0.0) || !std::isfinite(norm)) fail(ErrorCode::kZeroDirection, "direction is zero");
  Vector out = v / norm;
  Eigen::Index top = 0;
  for (Eigen::Index i = 1; i < out.size(); ++i)
    if (std::abs(out(i)) > std::abs(out(top))) top = i;
  if (out(top) < 0.0) out = -out;
  return out;
}

double angle_between(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double axis_angle(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const double c = std::abs(a.dot(b)) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, 0.0, 1.0));
}

AnnealResult anneal_minimize(const DirectionObjective& objective, int d, const AnnealConfig& cfg,
                             const AnnealOptions& options) {
  cfg.validate();
  if (d < 1) fail(ErrorCode::kParam, "dimension must be >= 1");
  AnnealResult result;
  if (d == 1) {
    result.best = Vector::Ones(1);
    result.value = guarded(objective, result.best);
    result.evaluations = 1;
    if (options.record_trace) result.trace.push_back({0, 0, result.value, result.value});
    return result;
  }
  std::optional<Vector> anchor;
  if (options.start) {
    if (options.start->size() != d) fail(ErrorCode::kDimensionMismatch, "start direction has wrong length");
    anchor = canonicalize(*options.start);
  }

  bool have_best = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Vector current = (r == 0 && anchor) ? *anchor : random_direction(d, rng);
    double value = guarded(objective, current);
    ++result.evaluations;
    Vector best = current;
    double best_value = value;

    double temperature = cfg.initial_temperature;
    for (int step = 0; step < cfg.steps; ++step) {
      const double scale = cfg.proposal_stddev * std::sqrt(temperature / cfg.initial_temperature);
      Vector xi(d);
      for (int i = 0; i < d; ++i) xi(i) = normal(rng);
      xi -= xi.dot(current) * current;
      Vector proposal = current + scale * xi;
      const double u = unif(rng);
      if (proposal.norm() > 1e-12) {
        proposal = canonicalize(proposal);
        const bool inside = !anchor || options.max_angle <= 0.0 || axis_angle(proposal, *anchor) <= options.max_angle;
        if (inside) {
          const double candidate = guarded(objective, proposal);
          ++result.evaluations;
          const double delta = candidate - value;
          if (delta <= 0.0 || u < std::exp(-delta / temperature)) {
            current = proposal;
            value = candidate;
          }
          if (value < best_value) {
            best = current;
            best_value = value;
          }
        }
      }
      if (options.record_trace) result.trace.push_back({r, step, value, best_value});
      temperature *= cfg.cooling_factor;
    }

    if (!have_best || best_value < result.value ||
        (best_value == result.value && lexicographically_less(best, result.best))) {
      result.best = best;
      result.value = best_value;
      have_best = true;
    }
  }
  return result;
}

}  // namespace ppursuit
