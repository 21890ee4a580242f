#include "core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace iquant {

Grid1D::Grid1D(std::vector<double> pts) : points(std::move(pts)) { validate(); }

Grid1D Grid1D::uniform(double lo, double hi, std::size_t n) {
  if (!(lo < hi)) throw InvalidArgument("grid: lo must be < hi");
  if (n < 2) throw InvalidArgument("grid: need at least 2 points");
  std::vector<double> pts(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) pts[i] = lo + static_cast<double>(i) * h;
  pts.back() = hi;  // pin the endpoint exactly
  return Grid1D(std::move(pts));
}

Grid1D Grid1D::refined(const Grid1D& coarse, std::size_t factor) {
  if (factor < 1) throw InvalidArgument("grid: refine factor must be >= 1");
  std::vector<double> pts;
  pts.reserve(coarse.cells() * factor + 1);
  for (std::size_t c = 0; c < coarse.cells(); ++c) {
    const double a = coarse.points[c];
    const double h = coarse.spacing(c) / static_cast<double>(factor);
    pts.push_back(a);
    for (std::size_t k = 1; k < factor; ++k)
      pts.push_back(a + static_cast<double>(k) * h);
  }
  pts.push_back(coarse.points.back());
  return Grid1D(std::move(pts));
}

double Grid1D::min_spacing() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    m = std::min(m, spacing(i));
  return m;
}

std::size_t Grid1D::cell_of(double x) const {
  if (x <= points.front()) return 0;
  if (x >= points.back()) return points.size() - 2;
  const auto it = std::upper_bound(points.begin(), points.end(), x);
  return static_cast<std::size_t>(it - points.begin()) - 1;
}

void Grid1D::validate() const {
  if (points.size() < 2) throw InvalidArgument("grid: need at least 2 points");
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i] < points[i + 1]) || !std::isfinite(points[i]))
      throw InvalidArgument("grid: points must be finite and strictly increasing");
  }
  if (!std::isfinite(points.back()))
    throw InvalidArgument("grid: points must be finite and strictly increasing");
}

}  // namespace iquant
