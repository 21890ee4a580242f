#pragma once

#include <span>
#include <string>
#include <vector>

#include "core/model.hpp"

namespace iquant {

// Default tolerance for stationarity residuals, in g units.
inline constexpr double kResidualTol = 1e-6;

enum class Domain { X, U };

// T ordered thresholds plus L = T+1 reconstruction values. Thresholds live
// either on the observation axis (X) or on the transformed axis U = g(X).
struct Quantizer {
  Domain domain = Domain::X;
  std::vector<double> thresholds;
  std::vector<double> recon;

  std::size_t levels() const { return recon.size(); }
  void validate() const;
  // Additionally checks recon values against the model's source range.
  void validate(const JointModel& m) const;
};

// For U-domain quantizers: the realized X intervals of each output index.
struct CellMap {
  std::vector<std::vector<XInterval>> cells;  // index ell -> ordered intervals
  std::size_t levels() const { return cells.size(); }
};

// E[S | X in (t_{l-1}, t_l)] for every cell induced by the thresholds.
std::vector<double> centroids_for(const JointModel& m, std::span<const double> thresholds);

// Pr(X in [lo,hi]) * Var(S | X in [lo,hi]) — the DP edge metric.
double partial_mse(const JointModel& m, double lo, double hi);

// Mean-squared reconstruction error of a quantizer. The X-domain overload
// rejects U-domain quantizers (those need their CellMap).
double evaluate_mse(const JointModel& m, const Quantizer& q);
double evaluate_mse(const JointModel& m, const CellMap& map, std::span<const double> recon);

// Stationarity residuals g(t_l) - (s_l + s_{l+1})/2, one per threshold.
std::vector<double> check_boundary_condition(const JointModel& m, const Quantizer& q);

// Midpoint rule for U-domain cells: every threshold v_l must equal
// (s_l + s_{l+1})/2 within tol. Equal-midpoint boundaries count as satisfied.
bool check_fine_cells(const TransformedModel& tm, const Quantizer& q, double tol);

// Nearest-neighbor cell check for a general vector quantizer on U = g(x):
// given reconstruction points and a sampled assignment x -> index, verifies
// each sample is assigned to the recon nearest to g(x) within tol.
bool check_vq_cells(const JointModel& m, std::span<const double> recon,
                    std::span<const double> xs, std::span<const std::size_t> assign,
                    double tol);

// Text record, round-trips bit-exact through 17 significant digits.
std::string to_record(const Quantizer& q);
Quantizer from_record(const std::string& text);

}  // namespace iquant
