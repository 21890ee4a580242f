#include "core/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "core/errors.hpp"

namespace iquant {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void Quantizer::validate() const {
  if (recon.size() != thresholds.size() + 1)
    throw InvalidArgument("quantizer: recon length must be threshold count + 1");
  for (std::size_t i = 0; i + 1 < thresholds.size(); ++i)
    if (!(thresholds[i] < thresholds[i + 1]))
      throw InvalidArgument("quantizer: thresholds must be strictly increasing");
  for (double t : thresholds)
    if (!std::isfinite(t)) throw InvalidArgument("quantizer: thresholds must be finite");
  for (double r : recon)
    if (!std::isfinite(r)) throw InvalidArgument("quantizer: recon must be finite");
}

void Quantizer::validate(const JointModel& m) const {
  validate();
  const double lo = m.s_grid().front(), hi = m.s_grid().back();
  for (double r : recon)
    if (r < lo - 1e-9 || r > hi + 1e-9)
      throw InvalidArgument("quantizer: recon value outside the source range");
}

std::vector<double> centroids_for(const JointModel& m, std::span<const double> thresholds) {
  std::vector<double> recon(thresholds.size() + 1);
  double lo = -kInf;
  for (std::size_t l = 0; l <= thresholds.size(); ++l) {
    const double hi = (l < thresholds.size()) ? thresholds[l] : kInf;
    recon[l] = m.interval_stats(lo, hi).mean;
    lo = hi;
  }
  return recon;
}

double partial_mse(const JointModel& m, double lo, double hi) {
  const IntervalStats st = m.interval_stats(lo, hi);
  return st.prob * st.var;
}

double evaluate_mse(const JointModel& m, const Quantizer& q) {
  if (q.domain != Domain::X)
    throw InvalidArgument("evaluate_mse: U-domain quantizer needs its cell map");
  q.validate();
  double mse = 0.0;
  double lo = -kInf;
  for (std::size_t l = 0; l < q.recon.size(); ++l) {
    const double hi = (l < q.thresholds.size()) ? q.thresholds[l] : kInf;
    const IntervalStats st = m.interval_stats(lo, hi);
    const double d = st.mean - q.recon[l];
    mse += st.prob * (st.var + d * d);
    lo = hi;
  }
  return mse;
}

double evaluate_mse(const JointModel& m, const CellMap& map, std::span<const double> recon) {
  if (map.levels() != recon.size())
    throw InvalidArgument("evaluate_mse: cell map / recon size mismatch");
  double mse = 0.0;
  for (std::size_t l = 0; l < map.cells.size(); ++l) {
    double p = 0.0, m1 = 0.0, m2 = 0.0;
    for (const XInterval& iv : map.cells[l]) {
      const IntervalStats st = m.interval_stats(iv.lo, iv.hi);
      p += st.prob;
      m1 += st.prob * st.mean;
      m2 += st.prob * (st.var + st.mean * st.mean);
    }
    mse += m2 - 2.0 * recon[l] * m1 + recon[l] * recon[l] * p;
  }
  return std::max(0.0, mse);
}

std::vector<double> check_boundary_condition(const JointModel& m, const Quantizer& q) {
  if (q.domain != Domain::X)
    throw InvalidArgument("check_boundary_condition: expects an X-domain quantizer");
  q.validate();
  std::vector<double> res(q.thresholds.size());
  for (std::size_t l = 0; l < q.thresholds.size(); ++l)
    res[l] = m.g(q.thresholds[l]) - 0.5 * (q.recon[l] + q.recon[l + 1]);
  return res;
}

bool check_fine_cells(const TransformedModel& tm, const Quantizer& q, double tol) {
  if (q.domain != Domain::U)
    throw InvalidArgument("check_fine_cells: expects a U-domain quantizer");
  q.validate();
  const double ulo = tm.u_grid().front(), uhi = tm.u_grid().back();
  for (std::size_t l = 0; l < q.thresholds.size(); ++l) {
    const double v = q.thresholds[l];
    if (v < ulo - tol || v > uhi + tol) return false;
    if (std::abs(v - 0.5 * (q.recon[l] + q.recon[l + 1])) > tol) return false;
  }
  return true;
}

bool check_vq_cells(const JointModel& m, std::span<const double> recon,
                    std::span<const double> xs, std::span<const std::size_t> assign,
                    double tol) {
  if (xs.size() != assign.size())
    throw InvalidArgument("check_vq_cells: sample/assignment size mismatch");
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double u = m.g(xs[k]);
    if (assign[k] >= recon.size())
      throw InvalidArgument("check_vq_cells: assignment index out of range");
    const double own = std::abs(u - recon[assign[k]]);
    for (double r : recon)
      if (std::abs(u - r) + tol < own) return false;
  }
  return true;
}

namespace {

void put17(std::ostringstream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

std::string to_record(const Quantizer& q) {
  std::ostringstream out;
  out << "iquant-quantizer v1\n";
  out << "domain " << (q.domain == Domain::X ? "x" : "u") << "\n";
  out << "thresholds " << q.thresholds.size();
  for (double t : q.thresholds) {
    out << ' ';
    put17(out, t);
  }
  out << "\nrecon " << q.recon.size();
  for (double r : q.recon) {
    out << ' ';
    put17(out, r);
  }
  out << "\n";
  return out.str();
}

Quantizer from_record(const std::string& text) {
  std::istringstream in(text);
  std::string word, ver;
  if (!(in >> word >> ver) || word != "iquant-quantizer" || ver != "v1")
    throw ConfigError("quantizer record: bad signature line");
  Quantizer q;
  std::string dom;
  if (!(in >> word >> dom) || word != "domain" || (dom != "x" && dom != "u"))
    throw ConfigError("quantizer record: bad domain line");
  q.domain = (dom == "x") ? Domain::X : Domain::U;
  std::size_t n = 0;
  if (!(in >> word >> n) || word != "thresholds")
    throw ConfigError("quantizer record: bad thresholds line");
  q.thresholds.resize(n);
  for (double& t : q.thresholds)
    if (!(in >> t)) throw ConfigError("quantizer record: truncated thresholds");
  if (!(in >> word >> n) || word != "recon")
    throw ConfigError("quantizer record: bad recon line");
  q.recon.resize(n);
  for (double& r : q.recon)
    if (!(in >> r)) throw ConfigError("quantizer record: truncated recon");
  q.validate();
  return q;
}

}  // namespace iquant
