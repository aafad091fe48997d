#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "core/types.hpp"

namespace ppursuit {

enum class DivergenceKind { kRelativeEntropy, kHellinger, kChiSquared, kPower, kL1 };

// Which convex phi is in force. The L1 member is kept for documentation and
// for the quadrature oracle; it refuses derivative requests because phi(x) =
// |x - 1| is not differentiable at 1 and therefore cannot drive the dual
// estimator.
struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::kRelativeEntropy;
  double gamma = 0.0;  // only read for kPower

  static DivergenceSpec relative_entropy() { return {DivergenceKind::kRelativeEntropy, 0.0}; }
  static DivergenceSpec hellinger() { return {DivergenceKind::kHellinger, 0.0}; }
  static DivergenceSpec chi_squared() { return {DivergenceKind::kChiSquared, 0.0}; }
  static DivergenceSpec power(double gamma);
  static DivergenceSpec l1() { return {DivergenceKind::kL1, 0.0}; }

  // "kl", "hellinger", "chi2", "power" (needs gamma), "l1".
  static DivergenceSpec from_name(std::string_view name, std::optional<double> gamma = {});

  std::string name() const;
  void validate() const;
  bool differentiable() const { return kind != DivergenceKind::kL1; }
};

struct PhiValues {
  double phi;
  double phi_prime;
  // phi*(phi'(x)), obtained through the Fenchel identity x * phi'(x) - phi(x).
  double conjugate_term;
};

// phi alone; defined at x = 0 whenever the limit is finite.
double phi(const DivergenceSpec& spec, double x);
double phi_prime(const DivergenceSpec& spec, double x);

PhiValues eval_phi(const DivergenceSpec& spec, double x);

// Composite Gauss-Legendre rule over [lower, upper] split into `panels`
// equal panels (15 nodes each).
struct QuadratureGrid {
  double lower = -10.0;
  double upper = 10.0;
  int panels = 200;
};

struct QuadratureGrid2d {
  QuadratureGrid x;
  QuadratureGrid y;
};

using Density1d = std::function<double(double)>;
using Density2d = std::function<double(double, double)>;

// Integral of phi(q/p) p over the grid. Test oracle only; never used inside the
// pursuit loop. `support_tolerance` is the largest q allowed where p == 0.
double divergence_quadrature(const DivergenceSpec& spec, const Density1d& q, const Density1d& p,
                             const QuadratureGrid& grid, double support_tolerance = 1e-300);
double divergence_quadrature(const DivergenceSpec& spec, const Density2d& q, const Density2d& p,
                             const QuadratureGrid2d& grid, double support_tolerance = 1e-300);

// Plain integral of a 1-D / 2-D function with the same rule.
double integrate(const Density1d& fn, const QuadratureGrid& grid);
double integrate(const Density2d& fn, const QuadratureGrid2d& grid);

}  // namespace ppursuit
