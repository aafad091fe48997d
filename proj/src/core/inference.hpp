#pragma once

#include <vector>

#include "core/pursuit.hpp"
#include "core/stopping.hpp"

namespace ppursuit {

struct CopulaReport {
  Matrix basis;  // d x d, extracted directions as columns
  TestReport final_test;
  bool verdict = false;  // true: copula densities agree in the basis
  std::vector<TestReport> level_tests;
  PursuitResult pursuit;
};

// Runs exactly d levels and tests the last one.
CopulaReport copula_gof(const Matrix& data, const PursuitConfig& cfg);
// Same report from a finished d-level pursuit.
CopulaReport copula_from_pursuit(PursuitResult result);

// Membership of b in the confidence region of level k (k >= 1), rebuilt
// from the data and the fitted levels before it.
bool level_membership(const Matrix& data, const PursuitResult& result, int k, const Vector& b);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double correlation = 0.0;
  double slope_se = 0.0;  // classical OLS standard error
  double intercept_se = 0.0;
};

LinearFit least_squares(const Matrix& data, int response, int predictor);

struct RegressionReport {
  LinearFit pursuit;  // from moments of the fitted pursuit density
  LinearFit least_squares;
  double correlation_pursuit = 0.0;
  double correlation_data = 0.0;
  // Axis the first extracted direction sits on, and its angle to it.
  int structure_axis = 0;
  double structure_angle_deg = 0.0;
};

struct RegressionOptions {
  int response = 0;
  int predictor = 1;
  double tolerance_deg = 15.0;
  int sample_size = 0;  // <= 0: the pursuit's instrumental size
  std::uint64_t seed = 1;
};

// d = 2 only. The pursuit density is sampled and the response regressed on
// the predictor through its first and second moments.
RegressionReport regress_via_pursuit(const Matrix& data, const PursuitResult& result,
                                     const RegressionOptions& options = {});

// E(B'X | A'X = t) under the base model, where A holds the extracted
// directions and B an orthonormal complement built by Gram-Schmidt.
// Conditionally on A'X every pursuit density shares the base law, so this is
// the regression of g^(k) as well.
struct DirectionRegression {
  Matrix extracted;   // d x k, orthonormalized
  Matrix complement;  // d x (d - k)
  LinearConditional conditional;
};

DirectionRegression regress_on_directions(const PursuitModel& model);

// Orthonormal completion of the columns of `dirs` (k <= d), canonical axes
// tried in order. Throws BasisDegenerate on dependent columns.
Matrix gram_schmidt_complement(const Matrix& dirs);

}  // namespace ppursuit
