#include "core/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace iquant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t tri_index(std::size_t n, std::size_t i, std::size_t j) {
  // Upper triangle (i < j) of an n x n table, row-major.
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

struct ChainResult {
  std::vector<std::size_t> picks;  // positions 1..M of the chosen thresholds
  double cost = 0.0;
  DpTable table;
};

DpTable fill_metric(std::size_t M, const std::function<double(std::size_t, std::size_t)>& metric) {
  DpTable t;
  t.num_positions = M;
  const std::size_t n = M + 2;
  t.metric.assign(n * (n - 1) / 2, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      t.metric[tri_index(n, i, j)] = metric(i, j);
  return t;
}

// Chain DP over positions 0..M+1 (0 and M+1 are the -inf/+inf anchors):
//   S_0 = 0 at position 0; S_l(j) = min_{i<j} S_{l-1}(i) + metric(i,j).
// Ascending scan with strict improvement keeps the smallest predecessor on
// ties, so the traceback yields the colexicographically smallest optimum.
ChainResult dp_chain(std::size_t M, int T, DpTable table) {
  const std::size_t n = M + 2;
  const int L = T + 1;
  auto met = [&](std::size_t i, std::size_t j) {
    return table.metric[tri_index(n, i, j)];
  };

  table.stage_values.assign(static_cast<std::size_t>(L) + 1,
                            std::vector<double>(n, kInf));
  table.backptr.assign(static_cast<std::size_t>(L) + 1, std::vector<int>(n, -1));
  table.stage_values[0][0] = 0.0;

  for (int l = 1; l <= L; ++l) {
    const auto& prev = table.stage_values[static_cast<std::size_t>(l - 1)];
    auto& cur = table.stage_values[static_cast<std::size_t>(l)];
    auto& bp = table.backptr[static_cast<std::size_t>(l)];
    // Stage l places threshold t_l; the last stage places the +inf anchor.
    const std::size_t j_lo = (l == L) ? M + 1 : 1;
    const std::size_t j_hi = (l == L) ? M + 1 : M;
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
      double best = kInf;
      int arg = -1;
      for (std::size_t i = 0; i < j; ++i) {
        if (prev[i] == kInf) continue;
        const double c = prev[i] + met(i, j);
        if (c < best) {
          best = c;
          arg = static_cast<int>(i);
        }
      }
      cur[j] = best;
      bp[j] = arg;
    }
  }

  ChainResult r;
  r.cost = table.stage_values[static_cast<std::size_t>(L)][M + 1];
  if (!(r.cost < kInf)) throw NumericError("dp: no feasible threshold placement");
  r.picks.assign(static_cast<std::size_t>(T), 0);
  std::size_t j = M + 1;
  for (int l = L; l >= 1; --l) {
    const int i = table.backptr[static_cast<std::size_t>(l)][j];
    if (l >= 2) r.picks[static_cast<std::size_t>(l - 2)] = static_cast<std::size_t>(i);
    j = static_cast<std::size_t>(i);
  }
  r.table = std::move(table);
  return r;
}

bool colex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  for (std::size_t k = a.size(); k-- > 0;) {
    if (a[k] != b[k]) return a[k] < b[k];
  }
  return false;
}

ChainResult brute_chain(std::size_t M, int T, DpTable table) {
  const std::size_t n = M + 2;
  auto met = [&](std::size_t i, std::size_t j) {
    return table.metric[tri_index(n, i, j)];
  };
  ChainResult best;
  best.cost = kInf;
  if (T == 0) {
    best.cost = met(0, M + 1);
    best.table = std::move(table);
    return best;
  }
  std::vector<std::size_t> pick(static_cast<std::size_t>(T));
  for (int k = 0; k < T; ++k) pick[static_cast<std::size_t>(k)] = static_cast<std::size_t>(k + 1);
  const std::size_t Tz = static_cast<std::size_t>(T);
  while (true) {
    // Left-to-right accumulation matches the DP's grouping bit for bit.
    double c = met(0, pick[0]);
    for (std::size_t k = 1; k < Tz; ++k) c += met(pick[k - 1], pick[k]);
    c += met(pick[Tz - 1], M + 1);
    if (c < best.cost ||
        (c == best.cost && !best.picks.empty() && colex_less(pick, best.picks))) {
      best.cost = c;
      best.picks = pick;
    }
    // Next combination of positions 1..M in lexicographic order.
    std::size_t k = Tz;
    while (k-- > 0) {
      if (pick[k] < M - (Tz - 1 - k)) {
        ++pick[k];
        for (std::size_t j = k + 1; j < Tz; ++j) pick[j] = pick[j - 1] + 1;
        break;
      }
      if (k == 0) {
        best.table = std::move(table);
        return best;
      }
    }
  }
}

double binomial_count(std::size_t m, int t) {
  double c = 1.0;
  for (int k = 1; k <= t; ++k)
    c *= static_cast<double>(m - static_cast<std::size_t>(k) + 1) / static_cast<double>(k);
  return c;
}

DpDesign threshold_design_from(const JointModel& m, const Grid1D& tgrid,
                               ChainResult chain) {
  DpDesign d;
  d.q.domain = Domain::X;
  d.q.thresholds.reserve(chain.picks.size());
  for (std::size_t p : chain.picks) d.q.thresholds.push_back(tgrid.points[p - 1]);
  d.q.recon = centroids_for(m, d.q.thresholds);
  d.mse = chain.cost;
  d.table = std::move(chain.table);
  return d;
}

DpTable threshold_metric(const JointModel& m, const Grid1D& tgrid) {
  const std::size_t M = tgrid.size();
  auto val = [&](std::size_t pos) {
    if (pos == 0) return -kInf;
    if (pos == M + 1) return kInf;
    return tgrid.points[pos - 1];
  };
  return fill_metric(M, [&](std::size_t i, std::size_t j) {
    return partial_mse(m, val(i), val(j));
  });
}

void check_dp_args(const Grid1D& tgrid, int T) {
  if (T < 0) throw InvalidArgument("dp: need T >= 0");
  if (static_cast<std::size_t>(T) >= tgrid.size())
    throw InvalidArgument("dp: T must be smaller than the candidate grid");
  if (tgrid.size() > kMetricCacheCap)
    throw InvalidArgument("dp: candidate grid exceeds the metric cache cap");
}

DpDesign trivial_design(const JointModel& m) {
  DpDesign d;
  d.q.domain = Domain::X;
  d.q.recon = {m.interval_stats(-kInf, kInf).mean};
  d.mse = partial_mse(m, -kInf, kInf);
  return d;
}

}  // namespace

double DpTable::metric_at(std::size_t i, std::size_t j) const {
  return metric[tri_index(num_positions + 2, i, j)];
}

Grid1D threshold_grid_from_model(const JointModel& m, std::size_t count,
                                 double thr_lo, double thr_hi) {
  const Grid1D& gx = m.x_grid();
  if (gx.size() < 4)
    throw InvalidArgument("threshold grid: model resolution too small");
  if (!(thr_lo < thr_hi)) {
    thr_lo = gx.points[1];
    thr_hi = gx.points[gx.size() - 2];
  }
  thr_lo = std::max(thr_lo, gx.points[1]);
  thr_hi = std::min(thr_hi, gx.points[gx.size() - 2]);
  if (!(thr_lo < thr_hi)) throw InvalidArgument("threshold grid: empty span");
  if (count < 2) throw InvalidArgument("threshold grid: need at least 2 points");

  std::vector<double> pts;
  pts.reserve(count);
  double last = -kInf;
  for (std::size_t k = 0; k < count; ++k) {
    const double target =
        thr_lo + (thr_hi - thr_lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    // Snap to the nearest integration node, keeping off the support edges.
    std::size_t c = gx.cell_of(target);
    std::size_t idx = (target - gx.points[c] <= gx.points[c + 1] - target) ? c : c + 1;
    idx = std::clamp<std::size_t>(idx, 1, gx.size() - 2);
    const double v = gx.points[idx];
    if (v > last) {
      pts.push_back(v);
      last = v;
    }
  }
  if (pts.size() < 2) throw InvalidArgument("threshold grid: degenerate snap");
  return Grid1D(std::move(pts));
}

std::vector<double> u_threshold_set(const TransformedModel& tm, const Grid1D& tgrid) {
  std::vector<double> vs;
  vs.reserve(tgrid.size());
  for (double t : tgrid.points) vs.push_back(tm.base().g(t));
  std::sort(vs.begin(), vs.end());
  std::vector<double> out;
  for (double v : vs) {
    if (out.empty() || v - out.back() > 1e-12) out.push_back(v);
  }
  return out;
}

DpDesign dp_direct(const JointModel& m, const Grid1D& tgrid, int T) {
  if (m.kind() != JointModel::Kind::Direct)
    throw InvalidArgument("dp_direct: expects a direct (X = S) model");
  return dp_indirect_threshold(m, tgrid, T);
}

DpDesign dp_indirect_threshold(const JointModel& m, const Grid1D& tgrid, int T) {
  check_dp_args(tgrid, T);
  if (T == 0) return trivial_design(m);
  return threshold_design_from(m, tgrid, dp_chain(tgrid.size(), T, threshold_metric(m, tgrid)));
}

DpDesign brute_force_threshold(const JointModel& m, const Grid1D& tgrid, int T) {
  check_dp_args(tgrid, T);
  if (binomial_count(tgrid.size(), T) > kBruteBudget)
    throw NumericError("brute force: enumeration budget exceeded");
  if (T == 0) return trivial_design(m);
  return threshold_design_from(m, tgrid, brute_chain(tgrid.size(), T, threshold_metric(m, tgrid)));
}

namespace {

RateDesign rate_design_from(const TransformedModel& tm,
                            const std::vector<std::size_t>& cuts,
                            const std::vector<double>& cut_values, ChainResult chain) {
  RateDesign d;
  d.q.domain = Domain::U;
  d.u_candidates = cut_values;
  const std::size_t ncells = tm.num_cells();
  std::vector<std::size_t> bounds;
  bounds.push_back(0);
  for (std::size_t p : chain.picks) {
    d.q.thresholds.push_back(cut_values[p - 1]);
    bounds.push_back(cuts[p - 1]);
  }
  bounds.push_back(ncells);
  for (std::size_t l = 0; l + 1 < bounds.size(); ++l) {
    d.q.recon.push_back(tm.range_centroid(bounds[l], bounds[l + 1]));
    d.map.cells.push_back(tm.range_intervals(bounds[l], bounds[l + 1]));
  }
  d.mse = chain.cost;
  d.table = std::move(chain.table);
  return d;
}

struct RatePrep {
  std::vector<std::size_t> cuts;   // strictly increasing interior cut ranks
  std::vector<double> values;      // the u value that induced each cut
};

RatePrep rate_cuts(const TransformedModel& tm, const Grid1D& tgrid) {
  RatePrep prep;
  const std::size_t ncells = tm.num_cells();
  for (double v : u_threshold_set(tm, tgrid)) {
    const std::size_t cut = tm.cut_of(v);
    if (cut == 0 || cut >= ncells) continue;
    if (!prep.cuts.empty() && prep.cuts.back() == cut) continue;
    prep.cuts.push_back(cut);
    prep.values.push_back(v);
  }
  return prep;
}

DpTable rate_metric(const TransformedModel& tm, const RatePrep& prep) {
  const std::size_t M = prep.cuts.size();
  const std::size_t ncells = tm.num_cells();
  auto rank = [&](std::size_t pos) {
    if (pos == 0) return static_cast<std::size_t>(0);
    if (pos == M + 1) return ncells;
    return prep.cuts[pos - 1];
  };
  return fill_metric(M, [&](std::size_t i, std::size_t j) {
    return tm.range_partial_mse(rank(i), rank(j));
  });
}

}  // namespace

RateDesign dp_indirect_rate(const TransformedModel& tm, const Grid1D& tgrid, int T) {
  if (T < 0) throw InvalidArgument("dp_indirect_rate: need T >= 0");
  if (tm.degenerate_u() && T > 0)
    throw NumericError("dp_indirect_rate: U = g(X) is degenerate; thresholds are useless");
  const RatePrep prep = rate_cuts(tm, tgrid);
  if (T == 0) {
    ChainResult chain;
    chain.cost = tm.range_partial_mse(0, tm.num_cells());
    chain.table = rate_metric(tm, RatePrep{});
    return rate_design_from(tm, {}, {}, std::move(chain));
  }
  if (static_cast<std::size_t>(T) > prep.cuts.size())
    throw InvalidArgument("dp_indirect_rate: T exceeds the distinct image grid");
  if (prep.cuts.size() > kMetricCacheCap)
    throw InvalidArgument("dp_indirect_rate: image grid exceeds the metric cache cap");
  return rate_design_from(tm, prep.cuts, prep.values,
                          dp_chain(prep.cuts.size(), T, rate_metric(tm, prep)));
}

RateDesign brute_force_rate(const TransformedModel& tm, const Grid1D& tgrid, int T) {
  if (T < 0) throw InvalidArgument("brute_force_rate: need T >= 0");
  if (tm.degenerate_u() && T > 0)
    throw NumericError("brute_force_rate: U = g(X) is degenerate");
  const RatePrep prep = rate_cuts(tm, tgrid);
  if (binomial_count(prep.cuts.size(), T) > kBruteBudget)
    throw NumericError("brute force: enumeration budget exceeded");
  if (T == 0) return dp_indirect_rate(tm, tgrid, 0);
  if (static_cast<std::size_t>(T) > prep.cuts.size())
    throw InvalidArgument("brute_force_rate: T exceeds the distinct image grid");
  return rate_design_from(tm, prep.cuts, prep.values,
                          brute_chain(prep.cuts.size(), T, rate_metric(tm, prep)));
}

DpDesign naive_two_step(const JointModel& m, const Grid1D& tgrid, int T) {
  check_dp_args(tgrid, T);
  // Step I: thresholds that are optimal for quantizing X itself.
  std::vector<double> marginal(m.x_marginal().begin(), m.x_marginal().end());
  const JointModel xsrc = JointModel::direct_from_pdf(m.x_grid(), std::move(marginal));
  DpDesign step1 = dp_indirect_threshold(xsrc, tgrid, T);
  // Step II: MMSE reconstruction of S given the cell of X.
  DpDesign d;
  d.q.domain = Domain::X;
  d.q.thresholds = step1.q.thresholds;
  d.q.recon = centroids_for(m, d.q.thresholds);
  d.mse = evaluate_mse(m, d.q);
  d.table = std::move(step1.table);
  return d;
}

}  // namespace iquant
