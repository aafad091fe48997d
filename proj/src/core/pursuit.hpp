#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "core/divergence.hpp"
#include "core/dual_estimator.hpp"
#include "core/error.hpp"
#include "core/kde.hpp"
#include "core/models.hpp"
#include "core/optimizer.hpp"
#include "core/stopping.hpp"

namespace ppursuit {

struct LevelDiagnostics {
  int instrumental_size = 0;
  int retained_x = 0;  // passing the floor, before pairing
  int retained_y = 0;
  int paired_n = 0;
  int masked_x = 0;
  int masked_y = 0;
  double theta = 0.0;
  double numerator_bandwidth = 0.0;
  // Scott bandwidth the instrumental projections would get on their own;
  // its gap to numerator_bandwidth signals smoothing mismatch.
  double denominator_scott_bandwidth = 0.0;
  double ess = 0.0;  // effective sample size of the instrumental draw
  int proposals = 0;
  double anneal_value = 0.0;  // fast-path objective at the optimum
  int anneal_evaluations = 0;
  double test_estimate = 0.0;
  Vector test_c_direction;
};

struct PursuitLevel {
  Vector direction;
  Kde1d numerator;    // data projections
  Kde1d denominator;  // projections of the level's instrumental sample
  double divergence_estimate = 0.0;
  double bootstrap_se = 0.0;
  TestReport test;
  LevelDiagnostics diagnostics;
};

class PursuitModel {
 public:
  explicit PursuitModel(EllipticalModel base) : base_(std::move(base)) {}

  const EllipticalModel& base() const { return base_; }
  const std::vector<PursuitLevel>& levels() const { return levels_; }
  int dim() const { return base_.dim(); }
  int k() const { return static_cast<int>(levels_.size()); }

  void add_level(PursuitLevel level);
  // Model truncated to its first k levels.
  PursuitModel prefix(int k) const;

 private:
  EllipticalModel base_;
  std::vector<PursuitLevel> levels_;
};

double eval_gk(const PursuitModel& model, const Eigen::Ref<const Vector>& x);
double log_eval_gk(const PursuitModel& model, const Eigen::Ref<const Vector>& x);

struct SampleOptions {
  int proposal_factor = 10;  // SIR proposals per requested draw
};

struct GkSample {
  Matrix sample;
  double ess = 0.0;
  int proposals = 0;
};

GkSample sample_gk(const PursuitModel& model, int n, std::uint64_t seed, const SampleOptions& options = {});

struct PursuitConfig {
  DivergenceSpec spec = DivergenceSpec::relative_entropy();
  int max_k = -1;  // < 0: the data dimension
  double alpha = 0.1;
  // nu <= 0 picks half the admissible bound, 0.5 / (4 + d).
  TruncationConfig truncation{0.0, 20, 1.0};
  // The d-dim floor is floor_fraction * m^{-nu} times the fitted Gaussian's
  // peak density; 1-D floors use the same fraction.
  double floor_fraction = 1e-3;
  AnnealConfig anneal;
  int instrumental_sample_size = 0;  // <= 0: the data size
  std::uint64_t seed = 1;
  bool paper_threshold = false;
  // Stop as soon as a test accepts H0; copula testing turns this off.
  bool stop_on_accept = true;
  int bootstrap_replicates = 200;
  double search_fraction = 0.2;
  double search_radius_deg = 10.0;
  int proposal_factor = 10;

  // Fills the data-dependent defaults and validates.
  PursuitConfig resolved(int d, int m) const;
  void validate(int d) const;
};

// Estimate and test of the bare instrumental fit (no direction).
struct NullLevel {
  double divergence_estimate = 0.0;
  double bootstrap_se = 0.0;
  TestReport test;
  LevelDiagnostics diagnostics;
};

struct PursuitResult {
  PursuitConfig config;  // resolved
  PursuitModel model;
  NullLevel null_level;
  // Number of extracted levels when the loop ended.
  int stopped_at = 0;
  bool accepted = false;
  // Divergence estimates, level 0 first.
  std::vector<double> trace;
  std::vector<TestReport> reports;
};

// Carries the levels finished before a step failed.
class PursuitError : public Error {
 public:
  PursuitError(const Error& cause, int level, std::shared_ptr<const PursuitResult> partial)
      : Error(cause.code(), "level " + std::to_string(level) + ": " + cause.what()),
        level_(level),
        partial_(std::move(partial)) {}

  int level() const noexcept { return level_; }
  const std::shared_ptr<const PursuitResult>& partial() const noexcept { return partial_; }

 private:
  int level_;
  std::shared_ptr<const PursuitResult> partial_;
};

// One level on top of `model` (which has k - 1 levels).
PursuitLevel pursuit_step(const PursuitModel& model, const Matrix& data, const PursuitConfig& cfg, int k);

PursuitResult run_pursuit(const Matrix& data, const PursuitConfig& cfg);

// Options shared by the dual context of every level of a run.
DualOptions dual_options(const PursuitConfig& cfg, const EllipticalModel& base, std::uint64_t seed);
// The dual context level k is fitted on: data against a draw of `model`
// (k - 1 levels; the bare base for k = 0 and k = 1). cfg must be resolved.
DualContext level_context(const PursuitModel& model, const Matrix& data, const PursuitConfig& cfg, int k,
                          GkSample* instrumental = nullptr);
StoppingConfig stopping_config(const PursuitConfig& cfg, std::uint64_t seed);

}  // namespace ppursuit
