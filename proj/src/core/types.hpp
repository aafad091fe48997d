#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace ppursuit {

using Vector = Eigen::VectorXd;
// Samples are stored one observation per row.
using Matrix = Eigen::MatrixXd;

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds so that every
// stochastic stage of a run is reproducible from one user seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEulerGamma = 0.57721566490153286061;

}  // namespace ppursuit
