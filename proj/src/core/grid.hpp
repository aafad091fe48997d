#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/pursuit.hpp"

namespace ppursuit {

// Up to two varying axes; every other coordinate is held at `fixed`.
struct GridSpec {
  std::vector<int> axes;
  std::vector<double> mins;
  std::vector<double> maxs;
  std::vector<int> counts;
  Vector fixed;  // length d

  void validate(int d) const;
  int points() const;
};

using DensityFn = std::function<double(const Vector&)>;

// Grid points in row order, the first axis varying slowest.
Matrix grid_points(const GridSpec& grid);

// Delimited table: one column per coordinate x0..x{d-1}, then density.
void emit_density_grid(const DensityFn& density, int d, const GridSpec& grid, const std::string& path);
void emit_density_grid(const PursuitModel& model, const GridSpec& grid, const std::string& path);

// Axes 0 and 1 (or 0 alone when d = 1) spanning mean +- 3 sd of the data,
// other coordinates fixed at the data mean.
GridSpec default_grid(const Matrix& data, int count = 41);

}  // namespace ppursuit
