#pragma once

#include <cstddef>
#include <vector>

namespace iquant {

// Finite discretization of one axis. Points are strictly increasing; spacing
// may be non-uniform.
struct Grid1D {
  std::vector<double> points;

  Grid1D() = default;
  explicit Grid1D(std::vector<double> pts);

  static Grid1D uniform(double lo, double hi, std::size_t n);
  // Subdivides every cell of `coarse` into `factor` equal parts. The coarse
  // points are kept bit-exact so values snapped to them stay on-node.
  static Grid1D refined(const Grid1D& coarse, std::size_t factor);

  std::size_t size() const { return points.size(); }
  std::size_t cells() const { return points.size() - 1; }
  double front() const { return points.front(); }
  double back() const { return points.back(); }
  double spacing(std::size_t i) const { return points[i + 1] - points[i]; }
  double min_spacing() const;

  // Index of the cell [p_i, p_{i+1}) containing x, clamped to [0, cells()-1].
  // Cells are closed-left / open-right; x == back() lands in the last cell.
  std::size_t cell_of(double x) const;

  void validate() const;
};

}  // namespace iquant
