#include "core/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace ppursuit {

void GridSpec::validate(int d) const {
  if (axes.empty() || axes.size() > 2) fail(ErrorCode::kParam, "grid needs one or two axes");
  if (mins.size() != axes.size() || maxs.size() != axes.size() || counts.size() != axes.size())
    fail(ErrorCode::kParam, "grid mins, maxs and counts need one entry per axis");
  if (fixed.size() != d) fail(ErrorCode::kDimensionMismatch, "grid fixed values need one entry per dimension");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] < 0 || axes[i] >= d) fail(ErrorCode::kParam, "grid axis out of range");
    if (counts[i] < 1) fail(ErrorCode::kParam, "grid counts must be >= 1");
    if (!(mins[i] <= maxs[i]) || !std::isfinite(mins[i]) || !std::isfinite(maxs[i]))
      fail(ErrorCode::kParam, "grid range must be finite with min <= max");
  }
  if (axes.size() == 2 && axes[0] == axes[1]) fail(ErrorCode::kParam, "grid axes must differ");
}

int GridSpec::points() const {
  int n = 1;
  for (int c : counts) n *= c;
  return n;
}

Matrix grid_points(const GridSpec& grid) {
  grid.validate(static_cast<int>(grid.fixed.size()));
  auto coordinate = [&](std::size_t axis, int i) {
    if (grid.counts[axis] == 1) return grid.mins[axis];
    return grid.mins[axis] + (grid.maxs[axis] - grid.mins[axis]) * i / (grid.counts[axis] - 1);
  };
  Matrix out(grid.points(), grid.fixed.size());
  const int inner = grid.axes.size() == 2 ? grid.counts[1] : 1;
  for (int row = 0; row < out.rows(); ++row) {
    Vector x = grid.fixed;
    x(grid.axes[0]) = coordinate(0, row / inner);
    if (grid.axes.size() == 2) x(grid.axes[1]) = coordinate(1, row % inner);
    out.row(row) = x.transpose();
  }
  return out;
}

void emit_density_grid(const DensityFn& density, int d, const GridSpec& grid, const std::string& path) {
  grid.validate(d);
  const Matrix pts = grid_points(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  for (int j = 0; j < d; ++j) out << 'x' << j << ',';
  out << "density\n";
  char buf[32];
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const Vector x = pts.row(i).transpose();
    for (int j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", x(j));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", density(x));
    out << buf;
  }
  if (!out.flush()) fail(ErrorCode::kIo, "write failed for " + path);
}

void emit_density_grid(const PursuitModel& model, const GridSpec& grid, const std::string& path) {
  emit_density_grid([&model](const Vector& x) { return eval_gk(model, x); }, model.dim(), grid, path);
}

GridSpec default_grid(const Matrix& data, int count) {
  const int d = static_cast<int>(data.cols());
  if (d < 1 || data.rows() < 2) fail(ErrorCode::kEmptyData, "grid needs data");
  GridSpec grid;
  grid.fixed = data.colwise().mean().transpose();
  for (int axis = 0; axis < std::min(d, 2); ++axis) {
    const double mean = grid.fixed(axis);
    const double sd = std::sqrt((data.col(axis).array() - mean).square().sum() / (data.rows() - 1));
    const double half = sd > 0.0 ? 3.0 * sd : 1.0;
    grid.axes.push_back(axis);
    grid.mins.push_back(mean - half);
    grid.maxs.push_back(mean + half);
    grid.counts.push_back(count);
  }
  return grid;
}

}  // namespace ppursuit
