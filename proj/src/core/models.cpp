#include "core/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "core/error.hpp"

namespace ppursuit {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// Eigenvalue ratio below which a covariance counts as singular.
constexpr double kConditionFloor = 1e-12;

bool is_spd(const Matrix& sigma) {
  if (sigma.rows() == 0 || sigma.rows() != sigma.cols()) return false;
  if (!sigma.allFinite()) return false;
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + sigma.cwiseAbs().maxCoeff()))
    return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  return hi > 0.0 && lo > kConditionFloor * hi;
}

// Orthonormal basis of the complement of span(q) where q has orthonormal
// columns. Candidates are the canonical vectors in order.
Matrix orthogonal_complement(const Matrix& q) {
  const int d = static_cast<int>(q.rows());
  const int k = static_cast<int>(q.cols());
  Matrix out(d, d - k);
  Matrix basis = q;
  int filled = 0;
  for (int i = 0; i < d && filled < d - k; ++i) {
    Vector v = Vector::Unit(d, i);
    for (int pass = 0; pass < 2; ++pass) v -= basis * (basis.transpose() * v);
    const double norm = v.norm();
    if (norm < 1e-8) continue;
    v /= norm;
    out.col(filled++) = v;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v;
  }
  return out;
}

const ScenarioDistribution::Gaussian* as_gaussian(const ScenarioDistribution& dist) {
  return std::get_if<ScenarioDistribution::Gaussian>(&dist.node());
}

void require_param(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::kParam, what);
}

void require_univariate(const ScenarioDistribution& dist, const char* where) {
  if (dist.dim() != 1) fail(ErrorCode::kParam, std::string(where) + " margins must be 1-dimensional");
  const auto& node = dist.node();
  const bool ok = std::holds_alternative<ScenarioDistribution::Gaussian>(node) ||
                  std::holds_alternative<ScenarioDistribution::Gumbel>(node) ||
                  std::holds_alternative<ScenarioDistribution::Exponential>(node);
  if (!ok) fail(ErrorCode::kParam, std::string(where) + " margins must be gaussian, gumbel or exponential");
}

double open_uniform(Rng& rng) {
  // (0, 1), never 0 so that logs and quantiles stay finite.
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  while (u <= 0.0) u = unif(rng);
  return u;
}

}  // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double standard_normal_pdf(double x) { return std::exp(-0.5 * x * x - 0.5 * kLogTwoPi); }

double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::kDomain, "normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

// ---------------------------------------------------------------------------

EllipticalModel::EllipticalModel(Vector mu, Matrix sigma, Generator generator)
    : mu_(std::move(mu)), sigma_(std::move(sigma)), generator_(generator) {
  if (sigma_.rows() != mu_.size() || sigma_.cols() != mu_.size())
    fail(ErrorCode::kDimensionMismatch, "covariance shape does not match mean length");
  if (!mu_.allFinite()) fail(ErrorCode::kParam, "mean has non-finite entries");
  if (!is_spd(sigma_)) fail(ErrorCode::kSingularCovariance, "covariance is not positive definite");
  sigma_ = 0.5 * (sigma_ + sigma_.transpose());
  Eigen::LLT<Matrix> llt(sigma_);
  if (llt.info() != Eigen::Success) fail(ErrorCode::kSingularCovariance, "Cholesky factorization failed");
  chol_ = llt.matrixL();
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
}

double EllipticalModel::log_normalizer() const {
  // Gaussian generator: c_d = (2 pi)^{-d/2}.
  return -0.5 * dim() * kLogTwoPi - 0.5 * log_det_;
}

double EllipticalModel::log_density(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != mu_.size()) fail(ErrorCode::kDimensionMismatch, "point dimension does not match model");
  const Vector z = chol_.triangularView<Eigen::Lower>().solve(x - mu_);
  return log_normalizer() - 0.5 * z.squaredNorm();
}

double EllipticalModel::density(const Eigen::Ref<const Vector>& x) const { return std::exp(log_density(x)); }

double EllipticalModel::peak_density() const { return std::exp(log_normalizer()); }

Vector EllipticalModel::density_rows(const Matrix& points) const {
  if (points.cols() != mu_.size()) fail(ErrorCode::kDimensionMismatch, "point dimension does not match model");
  Matrix centered = (points.rowwise() - mu_.transpose()).transpose();
  const Matrix z = chol_.triangularView<Eigen::Lower>().solve(centered);
  const double lognorm = log_normalizer();
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) out(i) = std::exp(lognorm - 0.5 * z.col(i).squaredNorm());
  return out;
}

Matrix EllipticalModel::sample(int n, Rng& rng) const {
  if (n < 0) fail(ErrorCode::kParam, "sample size must be non-negative");
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = dim();
  Matrix z(d, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) z(j, i) = normal(rng);
  Matrix out = (chol_ * z).transpose();
  out.rowwise() += mu_.transpose();
  return out;
}

EllipticalModel fit_instrumental(const Matrix& sample) {
  const auto n = sample.rows();
  const auto d = sample.cols();
  if (d < 1) fail(ErrorCode::kEmptyData, "sample has no columns");
  if (n < d + 1)
    fail(ErrorCode::kSingularCovariance, "need at least d + 1 = " + std::to_string(d + 1) +
                                             " observations, got " + std::to_string(n));
  const Vector mean = sample.colwise().mean();
  const Matrix centered = sample.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
  return EllipticalModel(mean, cov);
}

double elliptical_density(const EllipticalModel& model, const Eigen::Ref<const Vector>& x) {
  return model.density(x);
}

ProjectedParams project_params(const EllipticalModel& model, const Eigen::Ref<const Vector>& a) {
  if (a.size() != model.dim()) fail(ErrorCode::kDimensionMismatch, "direction dimension does not match model");
  if (a.squaredNorm() == 0.0) fail(ErrorCode::kZeroDirection, "direction is zero");
  return {a.dot(model.mu()), a.dot(model.sigma() * a)};
}

ConditionalModel conditional_model(const EllipticalModel& model, const Matrix& constrained_dirs,
                                   const Vector& values) {
  const int d = model.dim();
  const int k = static_cast<int>(constrained_dirs.cols());
  if (constrained_dirs.rows() != d) fail(ErrorCode::kDimensionMismatch, "constraint directions have wrong length");
  if (values.size() != k) fail(ErrorCode::kDimensionMismatch, "one value per constraint direction is required");
  if (k == 0) return {model, Matrix::Identity(d, d), Matrix(d, 0), false};
  if (k > d) fail(ErrorCode::kDegenerateConstraint, "more constraints than dimensions");

  // A = Q R; the constraint A'x = v becomes Q'x = R^{-T} v.
  Eigen::HouseholderQR<Matrix> qr(constrained_dirs);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, k);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double scale = constrained_dirs.cwiseAbs().maxCoeff();
  for (int i = 0; i < k; ++i)
    if (std::abs(r(i, i)) <= 1e-10 * scale)
      fail(ErrorCode::kDegenerateConstraint, "constraint directions are linearly dependent");
  const Vector q_values = r.transpose().triangularView<Eigen::Lower>().solve(values);

  ConditionalModel out;
  out.constraint_basis = q;
  out.free_basis = orthogonal_complement(q);
  if (k == d) {
    out.point_mass = true;
    return out;
  }

  const Matrix& s = model.sigma();
  const Matrix s11 = out.free_basis.transpose() * s * out.free_basis;
  const Matrix s12 = out.free_basis.transpose() * s * q;
  const Matrix s22 = q.transpose() * s * q;
  Eigen::LDLT<Matrix> ldlt(s22);
  if (ldlt.info() != Eigen::Success || !is_spd(s22))
    fail(ErrorCode::kDegenerateConstraint, "constrained covariance block is singular");
  const Vector mu1 = out.free_basis.transpose() * model.mu();
  const Vector mu2 = q.transpose() * model.mu();
  const Vector mean = mu1 + s12 * ldlt.solve(q_values - mu2);
  const Matrix cov = s11 - s12 * ldlt.solve(s12.transpose());
  out.model.emplace(mean, cov, model.generator());
  return out;
}

LinearConditional conditional_expectation(const EllipticalModel& model, const Matrix& constrained_dirs,
                                          const Matrix& response_dirs) {
  const int d = model.dim();
  if (constrained_dirs.rows() != d || response_dirs.rows() != d)
    fail(ErrorCode::kDimensionMismatch, "direction sets have wrong length");
  const Matrix& s = model.sigma();
  const Matrix saa = constrained_dirs.transpose() * s * constrained_dirs;
  if (!is_spd(saa)) fail(ErrorCode::kDegenerateConstraint, "constrained covariance block is singular");
  const Matrix sba = response_dirs.transpose() * s * constrained_dirs;
  LinearConditional out;
  out.slopes = saa.ldlt().solve(sba.transpose()).transpose();
  out.intercept = response_dirs.transpose() * model.mu() - out.slopes * (constrained_dirs.transpose() * model.mu());
  return out;
}

// ---------------------------------------------------------------------------

ScenarioDistribution::ScenarioDistribution(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

ScenarioDistribution ScenarioDistribution::gaussian(Vector mean, Matrix covariance) {
  return ScenarioDistribution(Gaussian{std::move(mean), std::move(covariance)});
}

ScenarioDistribution ScenarioDistribution::normal(double mean, double stddev) {
  return gaussian(Vector::Constant(1, mean), Matrix::Constant(1, 1, stddev * stddev));
}

ScenarioDistribution ScenarioDistribution::gumbel(double location, double scale) {
  return ScenarioDistribution(Gumbel{location, scale});
}

ScenarioDistribution ScenarioDistribution::exponential(double rate) {
  return ScenarioDistribution(Exponential{rate});
}

ScenarioDistribution ScenarioDistribution::gaussian_copula_pair(double rho, ScenarioDistribution first,
                                                                ScenarioDistribution second) {
  return ScenarioDistribution(GaussianCopulaPair{rho, {std::move(first), std::move(second)}});
}

ScenarioDistribution ScenarioDistribution::clayton_copula_pair(double theta, ScenarioDistribution first,
                                                               ScenarioDistribution second) {
  return ScenarioDistribution(ClaytonCopulaPair{theta, {std::move(first), std::move(second)}});
}

ScenarioDistribution ScenarioDistribution::product(std::vector<ScenarioDistribution> components) {
  return ScenarioDistribution(Product{std::move(components)});
}

ScenarioDistribution ScenarioDistribution::linear_map(ScenarioDistribution base, Matrix matrix, Vector offset) {
  return ScenarioDistribution(LinearMap{{std::move(base)}, std::move(matrix), std::move(offset)});
}

ScenarioDistribution ScenarioDistribution::linear_map(ScenarioDistribution base, Matrix matrix) {
  Vector offset = Vector::Zero(matrix.rows());
  return linear_map(std::move(base), std::move(matrix), std::move(offset));
}

ScenarioDistribution ScenarioDistribution::sum(std::vector<ScenarioDistribution> terms) {
  return ScenarioDistribution(Sum{std::move(terms)});
}

int ScenarioDistribution::dim() const {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return static_cast<int>(n.mean.size());
        } else if constexpr (std::is_same_v<T, Gumbel> || std::is_same_v<T, Exponential>) {
          return 1;
        } else if constexpr (std::is_same_v<T, GaussianCopulaPair> || std::is_same_v<T, ClaytonCopulaPair>) {
          return 2;
        } else if constexpr (std::is_same_v<T, Product>) {
          int total = 0;
          for (const auto& c : n.components) total += c.dim();
          return total;
        } else if constexpr (std::is_same_v<T, LinearMap>) {
          return static_cast<int>(n.matrix.rows());
        } else {
          return n.terms.empty() ? 0 : n.terms.front().dim();
        }
      },
      *node_);
}

void ScenarioDistribution::validate() const {
  std::visit(
      [this](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          require_param(n.mean.size() >= 1, "gaussian: mean must be non-empty");
          require_param(n.covariance.rows() == n.mean.size() && n.covariance.cols() == n.mean.size(),
                        "gaussian: covariance shape must match mean");
          require_param(is_spd(n.covariance), "gaussian: covariance must be positive definite");
        } else if constexpr (std::is_same_v<T, Gumbel>) {
          require_param(std::isfinite(n.location), "gumbel: location must be finite");
          require_param(n.scale > 0.0 && std::isfinite(n.scale), "gumbel: scale must be > 0");
        } else if constexpr (std::is_same_v<T, Exponential>) {
          require_param(n.rate > 0.0 && std::isfinite(n.rate), "exponential: rate must be > 0");
        } else if constexpr (std::is_same_v<T, GaussianCopulaPair>) {
          require_param(std::abs(n.rho) < 1.0, "gaussian_copula_pair: |rho| must be < 1");
          require_param(n.margins.size() == 2, "gaussian_copula_pair: exactly two margins");
          for (const auto& m : n.margins) {
            m.validate();
            require_univariate(m, "gaussian_copula_pair");
          }
        } else if constexpr (std::is_same_v<T, ClaytonCopulaPair>) {
          require_param(n.theta > 0.0 && std::isfinite(n.theta), "clayton_copula_pair: theta must be > 0");
          require_param(n.margins.size() == 2, "clayton_copula_pair: exactly two margins");
          for (const auto& m : n.margins) {
            m.validate();
            require_univariate(m, "clayton_copula_pair");
          }
        } else if constexpr (std::is_same_v<T, Product>) {
          require_param(!n.components.empty(), "product: needs at least one component");
          for (const auto& c : n.components) c.validate();
        } else if constexpr (std::is_same_v<T, LinearMap>) {
          require_param(n.base.size() == 1, "linear_map: exactly one base distribution");
          n.base.front().validate();
          require_param(n.matrix.rows() >= 1 && n.matrix.cols() == n.base.front().dim(),
                        "linear_map: matrix columns must equal the base dimension");
          require_param(n.matrix.allFinite(), "linear_map: matrix must be finite");
          require_param(n.offset.size() == n.matrix.rows(), "linear_map: offset length must equal matrix rows");
        } else {
          require_param(!n.terms.empty(), "sum: needs at least one term");
          for (const auto& t : n.terms) {
            t.validate();
            require_param(t.dim() == n.terms.front().dim(), "sum: terms must share a dimension");
          }
        }
        (void)this;
      },
      *node_);
}

double ScenarioDistribution::cdf(double x) const {
  if (const auto* g = as_gaussian(*this)) {
    require_param(g->mean.size() == 1, "cdf needs a 1-D distribution");
    return standard_normal_cdf((x - g->mean(0)) / std::sqrt(g->covariance(0, 0)));
  }
  if (const auto* g = std::get_if<Gumbel>(node_.get())) return std::exp(-std::exp(-(x - g->location) / g->scale));
  if (const auto* e = std::get_if<Exponential>(node_.get())) return x <= 0.0 ? 0.0 : -std::expm1(-e->rate * x);
  fail(ErrorCode::kParam, "cdf needs a 1-D gaussian, gumbel or exponential distribution");
}

double ScenarioDistribution::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::kDomain, "quantile needs u in (0, 1)");
  if (const auto* g = as_gaussian(*this)) {
    require_param(g->mean.size() == 1, "quantile needs a 1-D distribution");
    return g->mean(0) + std::sqrt(g->covariance(0, 0)) * standard_normal_quantile(u);
  }
  if (const auto* g = std::get_if<Gumbel>(node_.get())) return g->location - g->scale * std::log(-std::log(u));
  if (const auto* e = std::get_if<Exponential>(node_.get())) return -std::log1p(-u) / e->rate;
  fail(ErrorCode::kParam, "quantile needs a 1-D gaussian, gumbel or exponential distribution");
}

double ScenarioDistribution::density1d(double x) const {
  if (const auto* g = as_gaussian(*this)) {
    require_param(g->mean.size() == 1, "density1d needs a 1-D distribution");
    const double sd = std::sqrt(g->covariance(0, 0));
    return standard_normal_pdf((x - g->mean(0)) / sd) / sd;
  }
  if (const auto* g = std::get_if<Gumbel>(node_.get())) {
    const double z = (x - g->location) / g->scale;
    return std::exp(-z - std::exp(-z)) / g->scale;
  }
  if (const auto* e = std::get_if<Exponential>(node_.get())) return x < 0.0 ? 0.0 : e->rate * std::exp(-e->rate * x);
  fail(ErrorCode::kParam, "density1d needs a 1-D gaussian, gumbel or exponential distribution");
}

Matrix ScenarioDistribution::draw(int n, Rng& rng) const {
  if (n < 1) fail(ErrorCode::kParam, "draw needs n >= 1");
  return std::visit(
      [&](const auto& node) -> Matrix {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return EllipticalModel(node.mean, node.covariance).sample(n, rng);
        } else if constexpr (std::is_same_v<T, Gumbel> || std::is_same_v<T, Exponential>) {
          Matrix out(n, 1);
          for (int i = 0; i < n; ++i) out(i, 0) = quantile(open_uniform(rng));
          return out;
        } else if constexpr (std::is_same_v<T, GaussianCopulaPair>) {
          std::normal_distribution<double> normal(0.0, 1.0);
          const double s = std::sqrt(1.0 - node.rho * node.rho);
          Matrix out(n, 2);
          for (int i = 0; i < n; ++i) {
            const double z1 = normal(rng);
            const double z2 = node.rho * z1 + s * normal(rng);
            // Normal margins map straight through; otherwise go via the uniform scale.
            for (int j = 0; j < 2; ++j) {
              const double z = j == 0 ? z1 : z2;
              const auto& m = node.margins[j];
              if (const auto* g = as_gaussian(m)) {
                out(i, j) = g->mean(0) + std::sqrt(g->covariance(0, 0)) * z;
              } else {
                const double u = std::clamp(standard_normal_cdf(z), 1e-300, 1.0 - 1e-16);
                out(i, j) = m.quantile(u);
              }
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, ClaytonCopulaPair>) {
          // Marshall-Olkin: V ~ Gamma(1/theta), U_j = (1 + E_j / V)^{-1/theta}.
          std::gamma_distribution<double> gamma(1.0 / node.theta, 1.0);
          std::exponential_distribution<double> expo(1.0);
          Matrix out(n, 2);
          for (int i = 0; i < n; ++i) {
            double v = gamma(rng);
            while (v <= 0.0) v = gamma(rng);
            for (int j = 0; j < 2; ++j) {
              const double u = std::pow(1.0 + expo(rng) / v, -1.0 / node.theta);
              out(i, j) = node.margins[j].quantile(std::clamp(u, 1e-300, 1.0 - 1e-16));
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, Product>) {
          Matrix out(n, dim());
          int col = 0;
          for (const auto& c : node.components) {
            const Matrix block = c.draw(n, rng);
            out.middleCols(col, block.cols()) = block;
            col += static_cast<int>(block.cols());
          }
          return out;
        } else if constexpr (std::is_same_v<T, LinearMap>) {
          const Matrix base = node.base.front().draw(n, rng);
          Matrix out = base * node.matrix.transpose();
          out.rowwise() += node.offset.transpose();
          return out;
        } else {
          Matrix out = Matrix::Zero(n, dim());
          for (const auto& t : node.terms) out += t.draw(n, rng);
          return out;
        }
      },
      *node_);
}

std::optional<double> ScenarioDistribution::density(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim()) fail(ErrorCode::kDimensionMismatch, "point dimension does not match distribution");
  return std::visit(
      [&](const auto& node) -> std::optional<double> {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return EllipticalModel(node.mean, node.covariance).density(x);
        } else if constexpr (std::is_same_v<T, Gumbel> || std::is_same_v<T, Exponential>) {
          return density1d(x(0));
        } else if constexpr (std::is_same_v<T, GaussianCopulaPair>) {
          const double f1 = node.margins[0].density1d(x(0));
          const double f2 = node.margins[1].density1d(x(1));
          if (f1 == 0.0 || f2 == 0.0) return 0.0;
          auto score = [](const ScenarioDistribution& m, double v) {
            if (const auto* g = as_gaussian(m)) return (v - g->mean(0)) / std::sqrt(g->covariance(0, 0));
            const double u = std::clamp(m.cdf(v), 1e-300, 1.0 - 1e-16);
            return standard_normal_quantile(u);
          };
          const double a = score(node.margins[0], x(0));
          const double b = score(node.margins[1], x(1));
          const double r = node.rho;
          const double q = 1.0 - r * r;
          const double c = std::exp(-(r * r * (a * a + b * b) - 2.0 * r * a * b) / (2.0 * q)) / std::sqrt(q);
          return c * f1 * f2;
        } else if constexpr (std::is_same_v<T, ClaytonCopulaPair>) {
          const double f1 = node.margins[0].density1d(x(0));
          const double f2 = node.margins[1].density1d(x(1));
          if (f1 == 0.0 || f2 == 0.0) return 0.0;
          const double u = node.margins[0].cdf(x(0));
          const double v = node.margins[1].cdf(x(1));
          if (u <= 0.0 || v <= 0.0) return 0.0;
          const double t = node.theta;
          const double s = std::pow(u, -t) + std::pow(v, -t) - 1.0;
          const double c = (1.0 + t) * std::pow(u * v, -t - 1.0) * std::pow(s, -2.0 - 1.0 / t);
          return c * f1 * f2;
        } else if constexpr (std::is_same_v<T, Product>) {
          double total = 1.0;
          int col = 0;
          for (const auto& comp : node.components) {
            const int k = comp.dim();
            const auto part = comp.density(x.segment(col, k));
            if (!part) return std::nullopt;
            total *= *part;
            col += k;
          }
          return total;
        } else if constexpr (std::is_same_v<T, LinearMap>) {
          if (node.matrix.rows() != node.matrix.cols()) return std::nullopt;
          Eigen::FullPivLU<Matrix> lu(node.matrix);
          if (!lu.isInvertible()) return std::nullopt;
          const Vector z = lu.solve(x - node.offset);
          const auto base = node.base.front().density(z);
          if (!base) return std::nullopt;
          return *base / std::abs(lu.determinant());
        } else {
          if (node.terms.size() == 1) return node.terms.front().density(x);
          // Sums of Gaussians stay Gaussian; anything else has no closed form here.
          Vector mean = Vector::Zero(dim());
          Matrix cov = Matrix::Zero(dim(), dim());
          for (const auto& t : node.terms) {
            const auto* g = as_gaussian(t);
            if (!g) return std::nullopt;
            mean += g->mean;
            cov += g->covariance;
          }
          return EllipticalModel(mean, cov).density(x);
        }
      },
      *node_);
}

Matrix draw_scenario(const ScenarioDistribution& dist, int n, std::uint64_t seed) {
  dist.validate();
  Rng rng(seed);
  return dist.draw(n, rng);
}

}  // namespace ppursuit
