#pragma once

#include <vector>

#include "core/types.hpp"

namespace ppursuit {

// h_l = sd_l * m^{-1/(4+k)} per column (sd with divisor m - 1).
Vector scott_bandwidth(const Matrix& sample);
double scott_bandwidth(const Vector& values);

class Kde1d {
 public:
  Kde1d() = default;
  Kde1d(Vector points, double bandwidth);

  const Vector& points() const { return points_; }
  double bandwidth() const { return bandwidth_; }
  int size() const { return static_cast<int>(points_.size()); }

  // Never returns 0: far from the data the value is clamped to the smallest
  // positive double. log_eval stays exact there.
  double eval(double x) const;
  double log_eval(double x) const;
  Vector eval(const Vector& xs) const;
  double cdf(double x) const;
  double sample(Rng& rng) const;

 private:
  Vector points_;
  Vector sorted_;
  double bandwidth_ = 1.0;
};

// Product-Gaussian kernel, one bandwidth per axis.
class KdeNd {
 public:
  KdeNd() = default;
  KdeNd(Matrix points, Vector bandwidths);

  const Matrix& points() const { return points_; }
  const Vector& bandwidths() const { return bandwidths_; }
  int size() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }

  double eval(const Eigen::Ref<const Vector>& x) const;
  double log_eval(const Eigen::Ref<const Vector>& x) const;
  Vector eval_rows(const Matrix& queries) const;

  // Sources scaled by 1/h, one column per point.
  const Matrix& scaled_points() const { return scaled_; }
  double log_norm() const { return log_norm_; }

 private:
  Matrix points_;
  Vector bandwidths_;
  Matrix scaled_;
  double log_norm_ = 0.0;
};

// 1-D KDE of sample * a with the Scott bandwidth of the projections.
Kde1d project_and_fit(const Matrix& sample, const Eigen::Ref<const Vector>& a);

// Density estimates from all sources and from the two halves of a split of
// the sources. When `own_sample` is set, sources coinciding with the query
// are left out (leave-one-out, extended to exact ties).
struct SplitEstimate {
  Vector full;
  Vector half_a;
  Vector half_b;
};

// `in_half_a[j]` marks source j as a member of half A; empty means no split
// (half_a and half_b are then left empty).
SplitEstimate split_eval(const KdeNd& kde, const Matrix& queries, const std::vector<char>& in_half_a,
                         bool own_sample);
SplitEstimate split_eval(const Kde1d& kde, const Vector& queries, const std::vector<char>& in_half_a,
                         bool own_sample);

// Linear-binned approximation of a 1-D Gaussian KDE on a fixed grid, used in
// the optimizer's inner loop. Accuracy is a few 1e-4 relative in the bulk;
// where less than half a kernel's worth of mass is present the sum is done
// exactly, which keeps leave-one-out values of isolated points meaningful.
class BinnedKde1d {
 public:
  BinnedKde1d(const Vector& sources, double bandwidth, double lo, double hi);

  double eval(double x) const;
  // Leave out `multiplicity` sources located exactly at x.
  double eval_excluding(double x, double multiplicity) const;

 private:
  static constexpr double kSparse = 0.5;

  double interpolate(double x) const;
  double exact_sum(double x, bool skip_ties) const;

  std::vector<double> grid_;
  Vector sources_;
  double bandwidth_ = 1.0;
  double lo_ = 0.0;
  double step_ = 1.0;
  double self_kernel_ = 0.0;
  double count_ = 0.0;
};

}  // namespace ppursuit
