#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "core/types.hpp"

namespace ppursuit {

struct AnnealConfig {
  int steps = 2000;
  int restarts = 4;
  double initial_temperature = 1.0;
  double cooling_factor = 0.995;
  double proposal_stddev = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

// Unit vector with the largest-magnitude coordinate made positive (the first
// such coordinate on ties).
Vector canonicalize(const Eigen::Ref<const Vector>& v);

double angle_between(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);
// Angle between the lines spanned by a and b, in [0, pi/2].
double axis_angle(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

struct AnnealTracePoint {
  int restart;
  int step;
  double value;  // objective at the current state
  double best;   // best value seen so far in this restart
};

struct AnnealOptions {
  // Start of the first restart; later restarts start at random directions.
  std::optional<Vector> start;
  // Proposals farther than this angle (radians) from `start` are rejected.
  double max_angle = 0.0;
  bool record_trace = true;
};

struct AnnealResult {
  Vector best;
  double value;
  std::vector<AnnealTracePoint> trace;
  int evaluations = 0;
};

using DirectionObjective = std::function<double(const Vector&)>;

// Metropolis annealing on the unit sphere. Non-finite objective values count
// as a large penalty.
AnnealResult anneal_minimize(const DirectionObjective& objective, int d, const AnnealConfig& cfg,
                             const AnnealOptions& options = {});

}  // namespace ppursuit
