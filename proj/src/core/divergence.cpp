#include "core/divergence.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "core/error.hpp"

namespace ppursuit {

namespace {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_nonnegative(double x) {
  if (!(x >= 0.0)) fail(ErrorCode::kDomain, "phi argument must be >= 0, got " + format_double(x));
}

struct Node {
  double x;
  double w;
};

std::vector<Node> gauss_legendre_nodes(const QuadratureGrid& grid) {
  using Rule = boost::math::quadrature::gauss<double, 15>;
  if (!(grid.upper > grid.lower) || grid.panels < 1)
    fail(ErrorCode::kParam, "quadrature grid needs upper > lower and panels >= 1");
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  const double width = (grid.upper - grid.lower) / grid.panels;
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(grid.panels) * 15);
  for (int panel = 0; panel < grid.panels; ++panel) {
    const double mid = grid.lower + (panel + 0.5) * width;
    const double half = 0.5 * width;
    // boost stores the non-negative half of a symmetric rule.
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      if (abscissa[i] == 0.0) {
        nodes.push_back({mid, weights[i] * half});
      } else {
        nodes.push_back({mid - abscissa[i] * half, weights[i] * half});
        nodes.push_back({mid + abscissa[i] * half, weights[i] * half});
      }
    }
  }
  return nodes;
}

// p * phi(q / p) with the limiting conventions for vanishing densities.
double integrand(const DivergenceSpec& spec, double q, double p, double support_tolerance) {
  if (q < 0.0 || p < 0.0 || !std::isfinite(q) || !std::isfinite(p))
    fail(ErrorCode::kDomain, "densities must be finite and non-negative");
  if (p <= 0.0) {
    if (q > support_tolerance)
      fail(ErrorCode::kSupport, "p vanishes where q = " + format_double(q));
    return 0.0;
  }
  const double ratio = q / p;
  if (!std::isfinite(ratio)) fail(ErrorCode::kSupport, "density ratio overflows");
  return p * phi(spec, ratio);
}

}  // namespace

DivergenceSpec DivergenceSpec::power(double gamma) {
  DivergenceSpec spec{DivergenceKind::kPower, gamma};
  spec.validate();
  return spec;
}

DivergenceSpec DivergenceSpec::from_name(std::string_view name, std::optional<double> gamma) {
  if (name == "kl" || name == "relative_entropy") return relative_entropy();
  if (name == "hellinger") return hellinger();
  if (name == "chi2" || name == "chi_squared") return chi_squared();
  if (name == "l1") return l1();
  if (name == "power") {
    if (!gamma) fail(ErrorCode::kParam, "power divergence requires gamma");
    return power(*gamma);
  }
  fail(ErrorCode::kParam, "unknown divergence '" + std::string(name) + "'");
}

std::string DivergenceSpec::name() const {
  switch (kind) {
    case DivergenceKind::kRelativeEntropy: return "kl";
    case DivergenceKind::kHellinger: return "hellinger";
    case DivergenceKind::kChiSquared: return "chi2";
    case DivergenceKind::kPower: return "power";
    case DivergenceKind::kL1: return "l1";
  }
  return "unknown";
}

void DivergenceSpec::validate() const {
  if (kind == DivergenceKind::kPower && (gamma == 0.0 || gamma == 1.0 || !std::isfinite(gamma)))
    fail(ErrorCode::kParam, "power divergence requires gamma outside {0, 1}");
}

double phi(const DivergenceSpec& spec, double x) {
  spec.validate();
  check_nonnegative(x);
  switch (spec.kind) {
    case DivergenceKind::kRelativeEntropy:
      return x == 0.0 ? 1.0 : x * std::log(x) - x + 1.0;
    case DivergenceKind::kHellinger: {
      const double s = std::sqrt(x) - 1.0;
      return 2.0 * s * s;
    }
    case DivergenceKind::kChiSquared:
      return 0.5 * (x - 1.0) * (x - 1.0);
    case DivergenceKind::kPower: {
      const double g = spec.gamma;
      if (x == 0.0) {
        if (g < 0.0) fail(ErrorCode::kDomain, "phi(0) is infinite for power gamma < 0");
        return 1.0 / g;
      }
      return (std::pow(x, g) - g * x + g - 1.0) / (g * (g - 1.0));
    }
    case DivergenceKind::kL1:
      return std::abs(x - 1.0);
  }
  return 0.0;
}

double phi_prime(const DivergenceSpec& spec, double x) {
  spec.validate();
  check_nonnegative(x);
  switch (spec.kind) {
    case DivergenceKind::kRelativeEntropy:
      if (x == 0.0) fail(ErrorCode::kDomain, "phi' of relative entropy needs x > 0");
      return std::log(x);
    case DivergenceKind::kHellinger:
      if (x == 0.0) fail(ErrorCode::kDomain, "phi' of hellinger needs x > 0");
      return 2.0 - 2.0 / std::sqrt(x);
    case DivergenceKind::kChiSquared:
      return x - 1.0;
    case DivergenceKind::kPower: {
      const double g = spec.gamma;
      if (x == 0.0 && g < 1.0) fail(ErrorCode::kDomain, "phi' of power gamma < 1 needs x > 0");
      return (std::pow(x, g - 1.0) - 1.0) / (g - 1.0);
    }
    case DivergenceKind::kL1:
      fail(ErrorCode::kParam, "the L1 divergence is not differentiable and cannot be used here");
  }
  return 0.0;
}

PhiValues eval_phi(const DivergenceSpec& spec, double x) {
  const double derivative = phi_prime(spec, x);
  const double value = phi(spec, x);
  return {value, derivative, x * derivative - value};
}

double divergence_quadrature(const DivergenceSpec& spec, const Density1d& q, const Density1d& p,
                             const QuadratureGrid& grid, double support_tolerance) {
  spec.validate();
  double total = 0.0;
  for (const Node& node : gauss_legendre_nodes(grid))
    total += node.w * integrand(spec, q(node.x), p(node.x), support_tolerance);
  return total;
}

double divergence_quadrature(const DivergenceSpec& spec, const Density2d& q, const Density2d& p,
                             const QuadratureGrid2d& grid, double support_tolerance) {
  spec.validate();
  const auto xs = gauss_legendre_nodes(grid.x);
  const auto ys = gauss_legendre_nodes(grid.y);
  double total = 0.0;
  for (const Node& nx : xs) {
    double row = 0.0;
    for (const Node& ny : ys)
      row += ny.w * integrand(spec, q(nx.x, ny.x), p(nx.x, ny.x), support_tolerance);
    total += nx.w * row;
  }
  return total;
}

double integrate(const Density1d& fn, const QuadratureGrid& grid) {
  double total = 0.0;
  for (const Node& node : gauss_legendre_nodes(grid)) total += node.w * fn(node.x);
  return total;
}

double integrate(const Density2d& fn, const QuadratureGrid2d& grid) {
  const auto xs = gauss_legendre_nodes(grid.x);
  const auto ys = gauss_legendre_nodes(grid.y);
  double total = 0.0;
  for (const Node& nx : xs) {
    double row = 0.0;
    for (const Node& ny : ys) row += ny.w * fn(nx.x, ny.x);
    total += nx.w * row;
  }
  return total;
}

}  // namespace ppursuit
