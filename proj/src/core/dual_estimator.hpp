#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "core/divergence.hpp"
#include "core/kde.hpp"
#include "core/types.hpp"

namespace ppursuit {

// theta = scale * m^{-nu}. With scale = 1 this is the bare floor; the pursuit
// loop sets scale to a fraction of the fitted Gaussian's peak density so the
// floor is expressed in the data's own units.
struct TruncationConfig {
  double nu = 0.1;
  int min_retained = 20;
  double scale = 1.0;

  // Requires 0 < nu < 1/(4 + d).
  void validate(int d) const;
  double threshold(int m) const;
};

struct TruncationResult {
  std::vector<int> kept_x;
  std::vector<int> kept_y;
  double theta = 0.0;
};

// Keeps X_i with f_kde(X_i) >= theta and Y_i with g_side(Y_i) >= theta.
TruncationResult truncate(const Matrix& sample_x, const Matrix& sample_y, const KdeNd& f_kde,
                          const std::function<double(const Vector&)>& g_side, const TruncationConfig& cfg);
// Same rule on precomputed density values; m is the data size entering theta.
TruncationResult truncate_values(const Vector& f_at_x, const Vector& g_at_y, int m, const TruncationConfig& cfg);

// Density values of the four factors of the ratio at the averaged points:
// f and g estimates at the retained X and at the retained Y.
struct FactorValues {
  Vector fx, gx, fy, gy;
};

// Projected factors for one direction, with the floor used to mask points
// where any of them is too small.
struct ProjectedFactors {
  FactorValues full;
  std::optional<FactorValues> half_a;
  std::optional<FactorValues> half_b;
  double floor = 0.0;
};

// Per-point terms at the points that survived masking.
struct DualTerms {
  Vector x_terms;  // phi*(phi'(r(X_i)))
  Vector y_terms;  // phi'(r(Y_i)) * w(Y_i)
  int masked_x = 0;
  int masked_y = 0;

  double value() const { return y_terms.mean() - x_terms.mean(); }
};

struct DualOptions {
  TruncationConfig truncation;
  // 1-D floors are floor_fraction * m^{-nu} times the Gaussian-fit peak of
  // the projected data.
  double floor_fraction = 1e-3;
  // Split the KDE sources into random halves for the bias-corrected statistic.
  bool jackknife = true;
  std::uint64_t seed = 0;
};

class DualContext {
 public:
  // data_x: sample of f (m x d); data_y: instrumental-side sample (m_y x d).
  DualContext(DivergenceSpec spec, Matrix data_x, Matrix data_y, const DualOptions& options);

  const DivergenceSpec& spec() const { return spec_; }
  int dim() const { return static_cast<int>(data_x_.cols()); }
  int data_size() const { return static_cast<int>(data_x_.rows()); }
  int instrumental_size() const { return static_cast<int>(data_y_.rows()); }
  // Paired retained count n = min(kept_x, kept_y).
  int n() const { return static_cast<int>(x_index_.size()); }
  double theta() const { return truncation_.theta; }
  const TruncationResult& truncation() const { return truncation_; }
  const std::vector<int>& retained_x() const { return x_index_; }
  const std::vector<int>& retained_y() const { return y_index_; }
  const Matrix& data_x() const { return data_x_; }
  const Matrix& data_y() const { return data_y_; }
  const KdeNd& f_kde() const { return f_kde_; }
  const KdeNd& g_kde() const { return g_kde_; }
  const DualOptions& options() const { return options_; }

  // Exact 1-D KDE factors along c (halves included when jackknife is on).
  ProjectedFactors project_exact(const Eigen::Ref<const Vector>& c) const;
  // Binned approximation, full sample only; used inside the optimizer.
  ProjectedFactors project_fast(const Eigen::Ref<const Vector>& c) const;

  // Terms with ratio direction c and weight direction a; a null pointer
  // drops that factor (level 0 uses neither).
  DualTerms terms(const ProjectedFactors* c, const ProjectedFactors* a) const;
  // Generalized-jackknife terms 2 t(full) - (t(half A) + t(half B)) / 2.
  DualTerms corrected_terms(const ProjectedFactors* c, const ProjectedFactors* a) const;

  // Ratio at an arbitrary point x, from full-sample estimates.
  double density_ratio(const Eigen::Ref<const Vector>& b, const Eigen::Ref<const Vector>& x) const;

  double floor_1d(const Vector& data_projection) const;

 private:
  DivergenceSpec spec_;
  Matrix data_x_;
  Matrix data_y_;
  DualOptions options_;
  KdeNd f_kde_;
  KdeNd g_kde_;
  TruncationResult truncation_;
  std::vector<int> x_index_;
  std::vector<int> y_index_;
  std::vector<char> half_x_;
  std::vector<char> half_y_;
  Vector mult_x_;  // ties of each retained X_i within data_x (itself included)
  Vector mult_y_;
  FactorValues joint_full_;
  std::optional<FactorValues> joint_a_;
  std::optional<FactorValues> joint_b_;
};

struct PnM {
  double value;
  Vector per_point_x;
};

// Plug-in estimate B1 - B2 from exact KDEs; c = a gives the per-level
// divergence estimate.
PnM pn_m(const DualContext& ctx, const Eigen::Ref<const Vector>& c, const Eigen::Ref<const Vector>& a);
// Same with the binned fast path.
double pn_m_fast(const DualContext& ctx, const Eigen::Ref<const Vector>& c, const Eigen::Ref<const Vector>& a);

// Sample variance (divisor n - 1) of the X-side terms at (c, a).
double variance_m(const DualContext& ctx, const Eigen::Ref<const Vector>& c, const Eigen::Ref<const Vector>& a);
double variance_of_terms(const Vector& terms);

// The dual value with known densities in place of every KDE: mean over Y of
// phi'(r) f_a/g_a minus mean over X of phi*(phi'(r)), where
// r = g f_a / (f g_a). Used to check the estimator against quadrature.
using DensityNd = std::function<double(const Vector&)>;
double dual_value_with_densities(const DivergenceSpec& spec, const Matrix& x, const Matrix& y, const DensityNd& f,
                                 const DensityNd& g, const std::function<double(double)>& f_a,
                                 const std::function<double(double)>& g_a, const Eigen::Ref<const Vector>& a);

// Bootstrap standard error of mean(y_terms) - mean(x_terms).
double bootstrap_se(const DualTerms& terms, int replicates, std::uint64_t seed);

}  // namespace ppursuit
