#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/grid.hpp"

namespace iquant {

// Intervals with probability mass below this are treated as empty cells: the
// conditional mean defaults to the interval midpoint mapped through g and the
// conditional variance to zero, keeping DP metrics finite.
inline constexpr double kProbFloor = 1e-12;

struct IntervalStats {
  double prob = 0.0;
  double mean = 0.0;
  double var = 0.0;
  bool degenerate = false;
};

// A nonnegative function tabulated on a grid, integrated with the trapezoid
// rule. The cumulative array gives O(log N) interval queries whose values add
// exactly: query(a,b) == cum_at(b) - cum_at(a) by construction.
class Tabulated {
public:
  Tabulated() = default;
  Tabulated(std::shared_ptr<const Grid1D> grid, std::vector<double> values);

  double value_at(double x) const;  // linear interpolation, clamped at the ends
  double cum_at(double x) const;    // integral from grid.front() to x
  double total() const { return cum_.empty() ? 0.0 : cum_.back(); }
  std::span<const double> values() const { return values_; }
  std::span<const double> cum() const { return cum_; }
  const Grid1D& grid() const { return *grid_; }
  // Inverse of the cumulative at mass p (linear within a cell).
  double quantile(double p) const;

private:
  std::shared_ptr<const Grid1D> grid_;
  std::vector<double> values_;
  std::vector<double> cum_;  // cum_[j] = integral up to points[j]
};

// Statistical model of a scalar source S observed through a scalar X, held on
// finite grids. Two representations:
//   Direct   — X = S exactly; a single 1-D density, g(x) = x.
//   Indirect — full f(s,x) matrix plus the marginal caches the designers need.
// Models are immutable after construction and safe for concurrent reads.
class JointModel {
public:
  enum class Kind { Direct, Indirect };

  // Zero-mean Gaussian source observed directly (X = S).
  static JointModel gaussian_direct(double sigma, Grid1D grid);
  // Two-component location mixture N(x | s, mu1)/N(x | s, mu2) with equal
  // weights; the hidden source S is the components' standard deviation,
  // uniform on [s_low, s_high].
  static JointModel gaussian_mixture(double mu1, double mu2, double s_low,
                                     double s_high, Grid1D s_grid, Grid1D x_grid);
  // Raw density matrix (row = s node, column = x node); renormalized.
  static JointModel from_density(Grid1D s_grid, Grid1D x_grid,
                                 std::vector<double> density_row_major);
  // Direct model over an arbitrary tabulated pdf (renormalized). Used both
  // for test sources and for treating the X marginal as a source.
  static JointModel direct_from_pdf(Grid1D grid, std::vector<double> pdf);
  // Text format: two header lines listing the s and x grid coordinates, then
  // one row of density values per s node.
  static JointModel load_density_file(const std::string& path);
  static void save_density_file(const JointModel& m, const std::string& path);

  // Grid policy used by the config layer: direct spans +-6 sigma, mixture
  // spans [mu_min - 6 s_high, mu_max + 6 s_high] with s on [s_low, s_high].
  static JointModel gaussian_direct_default(double sigma, std::size_t resolution);
  static JointModel gaussian_mixture_default(double mu1, double mu2, double s_low,
                                             double s_high, std::size_t s_resolution,
                                             std::size_t x_resolution);

  Kind kind() const { return kind_; }
  const Grid1D& s_grid() const { return *s_grid_; }
  const Grid1D& x_grid() const { return *x_grid_; }

  double s_mean() const { return s_mean_; }
  double s_var() const { return s_var_; }

  // g(x) = E[S | X = x], linearly interpolated between nodes.
  double g(double x) const;
  std::span<const double> g_values() const;
  double x_density(double x) const { return xm0_.value_at(x); }
  double x_cum(double x) const { return xm0_.cum_at(x); }
  double x_quantile(double p) const { return xm0_.quantile(p); }
  std::span<const double> x_marginal() const { return xm0_.values(); }
  std::span<const double> s_prior() const;

  // P(X in [lo,hi]), E[S | X in [lo,hi]], Var(S | X in [lo,hi]).
  // lo/hi may be +-infinity; lo > hi is an error.
  IntervalStats interval_stats(double lo, double hi) const;

  // E[Var(S|X)]: the estimation MSE with an unquantized observation.
  double mmse_floor() const;

  // Exact trapezoid moments of one integration cell [x_c, x_{c+1}]:
  // mass, first and second S-moment. Sums of these reproduce interval
  // queries at grid-aligned endpoints bit-for-bit.
  void cell_moments(std::size_t c, double* p, double* m1, double* m2) const;

  // Conditional observation kernel, for the vector-observation engine.
  std::size_t s_nodes() const { return s_grid_->size(); }
  double cond_density(std::size_t si, double x) const;        // f(x | s_i)
  double cond_cum(std::size_t si, double x) const;            // P(X <= x | s_i)
  // Batch variants over every s node (one cell search instead of ns).
  void cond_density_all(double x, std::span<double> out) const;
  void cond_cum_all(double x, std::span<double> out) const;
  std::span<const double> s_weights() const { return s_w_; }  // trapezoid weights

private:
  JointModel() = default;
  void finalize_indirect();
  void finalize_direct(std::vector<double> pdf);

  Kind kind_ = Kind::Direct;
  std::shared_ptr<const Grid1D> s_grid_;
  std::shared_ptr<const Grid1D> x_grid_;

  // Indirect: density matrix (s row-major) and per-row cumulative integrals.
  std::vector<double> density_;
  std::vector<double> row_cum_;    // row i: integral of f(s_i, .) up to x_j
  std::vector<double> row_total_;  // row i: integral over the full x range
  std::vector<double> s_prior_;    // f_S at s nodes (= row totals)
  std::vector<double> s_w_;        // trapezoid node weights on the s grid
  std::vector<double> g_values_;

  // Marginal-moment caches over x: f_X, s f, s^2 f aggregated over s.
  Tabulated xm0_, xm1_, xm2_;

  double s_mean_ = 0.0;
  double s_var_ = 0.0;
};

// An X interval; lo <= hi, possibly infinite at the outer edges of a cell map.
struct XInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// U = g(X) represented at the resolution of the model's integration cells.
// Every integration cell carries its exact trapezoid moments and a g value
// (midpoint average); sorting cells by that value realizes the U axis, and a
// U-threshold becomes a cut in the sorted order. A binned f_SU view at
// `u_resolution` cells plus the U-to-X interval map is kept for inspection
// and checker use.
class TransformedModel {
public:
  TransformedModel(const JointModel& base, std::size_t u_resolution);

  const JointModel& base() const { return *base_; }
  const Grid1D& u_grid() const { return u_grid_; }
  bool degenerate_u() const { return degenerate_; }

  struct UCell {
    double prob = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    std::vector<XInterval> x_intervals;
  };
  std::span<const UCell> u_cells() const { return u_cells_; }

  // Exact machinery over g-sorted integration cells.
  std::size_t num_cells() const { return order_.size(); }
  // Number of cells with g value strictly below v (closed-left/open-right).
  std::size_t cut_of(double v) const;
  double sorted_g(std::size_t rank) const { return g_sorted_[rank]; }
  void range_moments(std::size_t r0, std::size_t r1, double* p, double* m1,
                     double* m2) const;
  double range_partial_mse(std::size_t r0, std::size_t r1) const;
  double range_centroid(std::size_t r0, std::size_t r1) const;
  // X intervals (merged contiguous runs) of the sorted-rank range [r0, r1).
  std::vector<XInterval> range_intervals(std::size_t r0, std::size_t r1) const;

private:
  const JointModel* base_;
  Grid1D u_grid_;
  std::vector<UCell> u_cells_;
  bool degenerate_ = false;

  std::vector<std::size_t> order_;  // cell indices sorted by g value
  std::vector<double> g_sorted_;
  std::vector<double> a0_, a1_, a2_;  // prefix moments over the sorted order
};

TransformedModel transform_to_u(const JointModel& model, std::size_t u_resolution);

}  // namespace iquant
