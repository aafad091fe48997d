#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "core/types.hpp"

namespace ppursuit {

// Density generator of an elliptical law. Only the Gaussian member
// xi(t) = exp(-t) is implemented; the enum and the normalizer hook keep room
// for heavier-tailed members.
enum class Generator { kGaussian };

// E_d(mu, Sigma, xi): density c_d |Sigma|^{-1/2} xi((x - mu)' Sigma^{-1} (x - mu) / 2).
class EllipticalModel {
 public:
  // Throws SingularCovariance when sigma is not symmetric positive definite.
  EllipticalModel(Vector mu, Matrix sigma, Generator generator = Generator::kGaussian);

  int dim() const { return static_cast<int>(mu_.size()); }
  const Vector& mu() const { return mu_; }
  const Matrix& sigma() const { return sigma_; }
  Generator generator() const { return generator_; }
  // Lower Cholesky factor of sigma.
  const Matrix& cholesky() const { return chol_; }

  double density(const Eigen::Ref<const Vector>& x) const;
  double log_density(const Eigen::Ref<const Vector>& x) const;
  // Density at the mode, c_d |Sigma|^{-1/2}.
  double peak_density() const;

  // Batch evaluation over the rows of `points`.
  Vector density_rows(const Matrix& points) const;

  // n draws, one per row.
  Matrix sample(int n, Rng& rng) const;

 private:
  double log_normalizer() const;

  Vector mu_;
  Matrix sigma_;
  Generator generator_;
  Matrix chol_;
  double log_det_ = 0.0;
};

// Gaussian-generator model with the sample mean and the unbiased sample
// covariance. Never regularizes: a singular covariance is an error.
EllipticalModel fit_instrumental(const Matrix& sample);

double elliptical_density(const EllipticalModel& model, const Eigen::Ref<const Vector>& x);

struct ProjectedParams {
  double mean;
  double variance;
};

// (a' mu, a' Sigma a); for the Gaussian generator this is the full law of a'Y.
ProjectedParams project_params(const EllipticalModel& model, const Eigen::Ref<const Vector>& a);

// Conditional law of Y given A'Y = values, expressed in rotated coordinates.
// `free_basis` (d x (d-k), orthonormal) spans the orthogonal complement of the
// constraint directions; the conditional model is the law of free_basis' Y.
struct ConditionalModel {
  std::optional<EllipticalModel> model;  // empty when every direction is constrained
  Matrix free_basis;
  Matrix constraint_basis;  // orthonormal basis of span(A)
  bool point_mass = false;
};

// `constrained_dirs` is d x k with linearly independent columns.
ConditionalModel conditional_model(const EllipticalModel& model, const Matrix& constrained_dirs,
                                   const Vector& values);

// E(B'Y | A'Y = t) = intercept + slopes * t for a Gaussian Y.
struct LinearConditional {
  Vector intercept;  // length r
  Matrix slopes;     // r x k
};
LinearConditional conditional_expectation(const EllipticalModel& model, const Matrix& constrained_dirs,
                                          const Matrix& response_dirs);

// ---------------------------------------------------------------------------
// Data-generating distributions used by the bundled scenarios.

class ScenarioDistribution {
 public:
  struct Gaussian {
    Vector mean;
    Matrix covariance;
  };
  // Maximum-type Gumbel: F(x) = exp(-exp(-(x - location) / scale)).
  struct Gumbel {
    double location;
    double scale;
  };
  struct Exponential {
    double rate;
  };
  // Pair with a Gaussian copula (correlation rho) and two 1-D margins.
  struct GaussianCopulaPair {
    double rho;
    std::vector<ScenarioDistribution> margins;
  };
  // Pair with a Clayton copula (theta > 0, lower-tail dependence).
  struct ClaytonCopulaPair {
    double theta;
    std::vector<ScenarioDistribution> margins;
  };
  // Independent blocks, concatenated in order.
  struct Product {
    std::vector<ScenarioDistribution> components;
  };
  // matrix * base + offset.
  struct LinearMap {
    std::vector<ScenarioDistribution> base;  // exactly one element
    Matrix matrix;
    Vector offset;
  };
  // Sum of independent draws of equal dimension (convolution).
  struct Sum {
    std::vector<ScenarioDistribution> terms;
  };

  using Node = std::variant<Gaussian, Gumbel, Exponential, GaussianCopulaPair, ClaytonCopulaPair,
                            Product, LinearMap, Sum>;

  explicit ScenarioDistribution(Node node);

  static ScenarioDistribution gaussian(Vector mean, Matrix covariance);
  static ScenarioDistribution normal(double mean, double stddev);
  static ScenarioDistribution gumbel(double location, double scale);
  static ScenarioDistribution exponential(double rate);
  static ScenarioDistribution gaussian_copula_pair(double rho, ScenarioDistribution first,
                                                   ScenarioDistribution second);
  static ScenarioDistribution clayton_copula_pair(double theta, ScenarioDistribution first,
                                                  ScenarioDistribution second);
  static ScenarioDistribution product(std::vector<ScenarioDistribution> components);
  static ScenarioDistribution linear_map(ScenarioDistribution base, Matrix matrix, Vector offset);
  static ScenarioDistribution linear_map(ScenarioDistribution base, Matrix matrix);
  static ScenarioDistribution sum(std::vector<ScenarioDistribution> terms);

  const Node& node() const { return *node_; }
  int dim() const;
  // Throws ParamError naming the offending parameter.
  void validate() const;

  Matrix draw(int n, Rng& rng) const;
  // Closed-form density when one exists (not for Sum, nor for non-square maps).
  std::optional<double> density(const Eigen::Ref<const Vector>& x) const;

  // 1-D members only (Gaussian of dimension 1, Gumbel, Exponential).
  double cdf(double x) const;
  double quantile(double u) const;
  double density1d(double x) const;

 private:
  std::shared_ptr<const Node> node_;
};

// Deterministic given (dist, n, seed).
Matrix draw_scenario(const ScenarioDistribution& dist, int n, std::uint64_t seed);

double standard_normal_cdf(double x);
double standard_normal_quantile(double p);
double standard_normal_pdf(double x);

}  // namespace ppursuit
