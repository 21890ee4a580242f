#pragma once

#include <functional>
#include <vector>

#include "core/quantizer.hpp"

namespace iquant {

// Full metric caches are materialized; grids beyond this are refused.
inline constexpr std::size_t kMetricCacheCap = 4096;
// Exhaustive enumeration budget for the brute-force oracle.
inline constexpr double kBruteBudget = 1e6;

// State table of one designer run. Positions 0..M+1 index the candidate grid
// with explicit -inf / +inf sentinels at 0 and M+1; stage 0 is zero at the
// low sentinel and +inf elsewhere.
struct DpTable {
  std::size_t num_positions = 0;  // M (real candidates, sentinels excluded)
  std::vector<std::vector<double>> stage_values;
  std::vector<std::vector<int>> backptr;
  std::vector<double> metric;  // flattened upper triangle over 0..M+1
  double metric_at(std::size_t i, std::size_t j) const;
};

struct DpDesign {
  Quantizer q;
  double mse = 0.0;
  DpTable table;
};

struct RateDesign {
  Quantizer q;  // thresholds in the U domain
  CellMap map;
  double mse = 0.0;
  DpTable table;
  std::vector<double> u_candidates;  // the deduplicated image grid
};

// Threshold candidates snapped onto the model's integration nodes within
// [thr_lo, thr_hi] (pass lo >= hi for the full interior span). The two extreme
// integration nodes are never candidates.
Grid1D threshold_grid_from_model(const JointModel& m, std::size_t count,
                                 double thr_lo = 0.0, double thr_hi = 0.0);

// Candidate U thresholds: image of the X candidate grid under g, sorted and
// deduplicated at 1e-12.
std::vector<double> u_threshold_set(const TransformedModel& tm, const Grid1D& tgrid);

// Optimal direct quantizer over the candidate grid (X = S models only).
DpDesign dp_direct(const JointModel& m, const Grid1D& tgrid, int T);
// Optimal threshold-constrained indirect quantizer over the candidate grid.
DpDesign dp_indirect_threshold(const JointModel& m, const Grid1D& tgrid, int T);
// Optimal rate-constrained indirect quantizer: DP over U-domain cuts induced
// by the image grid, with the realized X intervals reported as a cell map.
RateDesign dp_indirect_rate(const TransformedModel& tm, const Grid1D& tgrid, int T);

// Exhaustive reference optima; same tie rule as the DP (colexicographically
// smallest among exact cost ties).
DpDesign brute_force_threshold(const JointModel& m, const Grid1D& tgrid, int T);
RateDesign brute_force_rate(const TransformedModel& tm, const Grid1D& tgrid, int T);

// Two-step baseline: thresholds from the direct DP on the X marginal, then
// MMSE reconstruction of S per cell.
DpDesign naive_two_step(const JointModel& m, const Grid1D& tgrid, int T);

}  // namespace iquant
