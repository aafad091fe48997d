#include "core/inference.hpp"

#include <cmath>
#include <limits>

#include "core/stats.hpp"

namespace ppursuit {

namespace {

constexpr double kMaxCondition = 1e6;
constexpr std::uint64_t kRegressionStream = 600;

Matrix direction_matrix(const PursuitModel& model) {
  Matrix a(model.dim(), model.k());
  for (int j = 0; j < model.k(); ++j) a.col(j) = model.levels()[static_cast<std::size_t>(j)].direction;
  return a;
}

double condition_number(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double lo = s(s.size() - 1);
  return lo > 0.0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

LinearFit fit_columns(const Vector& y, const Vector& x) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 3) fail(ErrorCode::kDegeneratePredictor, "least squares needs at least three points");
  const double mx = x.mean();
  const double my = y.mean();
  const Vector dx = x.array() - mx;
  const Vector dy = y.array() - my;
  const double sxx = dx.squaredNorm();
  const double syy = dy.squaredNorm();
  const double sxy = dx.dot(dy);
  if (!(sxx > 1e-300) || sxx <= 1e-24 * n * (mx * mx + 1.0))
    fail(ErrorCode::kDegeneratePredictor, "predictor has zero variance");
  LinearFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.correlation = syy > 0.0 ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 0.0;
  const double rss = std::max(0.0, syy - out.slope * sxy);
  const double s2 = rss / (n - 2.0);
  out.slope_se = std::sqrt(s2 / sxx);
  out.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return out;
}

}  // namespace

CopulaReport copula_gof(const Matrix& data, const PursuitConfig& cfg) {
  PursuitConfig c = cfg;
  c.max_k = static_cast<int>(data.cols());
  c.stop_on_accept = false;
  return copula_from_pursuit(run_pursuit(data, c));
}

CopulaReport copula_from_pursuit(PursuitResult result) {
  const int d = result.model.dim();
  CopulaReport out{direction_matrix(result.model), {}, false, {}, std::move(result)};
  if (out.pursuit.model.k() != d) fail(ErrorCode::kBasisDegenerate, "pursuit extracted fewer than d directions");
  const double cond = condition_number(out.basis);
  if (!(cond <= kMaxCondition))
    fail(ErrorCode::kBasisDegenerate, "extracted directions are numerically dependent (condition number " +
                                          std::to_string(cond) + ")");
  out.level_tests = out.pursuit.reports;
  out.final_test = out.pursuit.reports.back();
  out.verdict = out.final_test.accept_h0;
  return out;
}

bool level_membership(const Matrix& data, const PursuitResult& result, int k, const Vector& b) {
  if (k < 1 || k > result.model.k() + 1) fail(ErrorCode::kParam, "membership level out of range");
  const DualContext ctx = level_context(result.model.prefix(k - 1), data, result.config, k);
  return ellipsoid_membership(ctx, b, result.config.alpha, result.config.paper_threshold);
}

LinearFit least_squares(const Matrix& data, int response, int predictor) {
  if (response < 0 || predictor < 0 || response >= data.cols() || predictor >= data.cols())
    fail(ErrorCode::kDimensionMismatch, "column index out of range");
  if (data.rows() == 0) fail(ErrorCode::kEmptyData, "no observations");
  return fit_columns(data.col(response), data.col(predictor));
}

RegressionReport regress_via_pursuit(const Matrix& data, const PursuitResult& result,
                                     const RegressionOptions& options) {
  if (data.cols() != 2 || result.model.dim() != 2) fail(ErrorCode::kDimensionMismatch, "regression needs d = 2");
  if (options.response == options.predictor) fail(ErrorCode::kParam, "response and predictor must differ");
  if (result.model.k() < 1) fail(ErrorCode::kStructureMismatch, "pursuit extracted no direction");
  const Vector& a = result.model.levels().front().direction;
  RegressionReport out;
  double best = kPi;
  for (int axis = 0; axis < 2; ++axis) {
    const double angle = axis_angle(a, Vector::Unit(2, axis));
    if (angle < best) {
      best = angle;
      out.structure_axis = axis;
    }
  }
  out.structure_angle_deg = best * 180.0 / kPi;
  if (out.structure_angle_deg > options.tolerance_deg)
    fail(ErrorCode::kStructureMismatch, "extracted direction is " + std::to_string(out.structure_angle_deg) +
                                            " degrees from the nearest axis");

  const int n = options.sample_size > 0 ? options.sample_size : result.config.instrumental_sample_size;
  const GkSample s = sample_gk(result.model, n, derive_seed(options.seed, kRegressionStream),
                               {result.config.proposal_factor});
  out.pursuit = fit_columns(s.sample.col(options.response), s.sample.col(options.predictor));
  out.least_squares = least_squares(data, options.response, options.predictor);
  out.correlation_pursuit = out.pursuit.correlation;
  out.correlation_data = out.least_squares.correlation;
  return out;
}

Matrix gram_schmidt_complement(const Matrix& dirs) {
  const auto d = dirs.rows();
  const auto k = dirs.cols();
  if (k > d) fail(ErrorCode::kBasisDegenerate, "more directions than dimensions");
  Matrix basis(d, d);
  Eigen::Index filled = 0;
  auto push = [&](Vector v, bool must) {
    for (Eigen::Index j = 0; j < filled; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    for (Eigen::Index j = 0; j < filled; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    const double norm = v.norm();
    if (norm < 1e-6) {
      if (must) fail(ErrorCode::kBasisDegenerate, "directions are linearly dependent");
      return;
    }
    basis.col(filled++) = v / norm;
  };
  for (Eigen::Index j = 0; j < k; ++j) {
    const double norm = dirs.col(j).norm();
    if (!(norm > 0.0)) fail(ErrorCode::kZeroDirection, "direction is zero");
    push(dirs.col(j) / norm, true);
  }
  for (Eigen::Index i = 0; i < d && filled < d; ++i) push(Vector::Unit(d, i), false);
  return basis.rightCols(d - k);
}

DirectionRegression regress_on_directions(const PursuitModel& model) {
  if (model.k() < 1) fail(ErrorCode::kStructureMismatch, "pursuit extracted no direction");
  const Matrix a = direction_matrix(model);
  if (!(condition_number(a) <= kMaxCondition)) fail(ErrorCode::kBasisDegenerate, "extracted directions are dependent");
  DirectionRegression out;
  out.complement = gram_schmidt_complement(a);
  Eigen::HouseholderQR<Matrix> qr(a);
  out.extracted = (qr.householderQ() * Matrix::Identity(a.rows(), a.cols())).eval();
  if (out.complement.cols() == 0) {
    out.conditional = {Vector(0), Matrix(0, a.cols())};
    return out;
  }
  out.conditional = conditional_expectation(model.base(), a, out.complement);
  return out;
}

}  // namespace ppursuit
