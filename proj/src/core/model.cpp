#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "core/errors.hpp"

namespace iquant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

std::vector<double> trapezoid_weights(const Grid1D& g) {
  std::vector<double> w(g.size(), 0.0);
  for (std::size_t c = 0; c < g.cells(); ++c) {
    const double half = 0.5 * g.spacing(c);
    w[c] += half;
    w[c + 1] += half;
  }
  return w;
}

double interp_value(const Grid1D& g, std::span<const double> vals, double x) {
  if (x <= g.front()) return vals.front();
  if (x >= g.back()) return vals.back();
  const std::size_t c = g.cell_of(x);
  const double t = (x - g.points[c]) / g.spacing(c);
  return vals[c] + (vals[c + 1] - vals[c]) * t;
}

// Integral from the grid front to x of the piecewise-linear interpolant,
// expressed as prefix value plus a partial-cell term so that differences of
// this function are exactly additive across shared endpoints.
double interp_cum(const Grid1D& g, std::span<const double> vals,
                  std::span<const double> cum, double x) {
  if (x <= g.front()) return 0.0;
  if (x >= g.back()) return cum.back();
  const std::size_t c = g.cell_of(x);
  const double dx = x - g.points[c];
  const double t = dx / g.spacing(c);
  const double vx = vals[c] + (vals[c + 1] - vals[c]) * t;
  return cum[c] + 0.5 * dx * (vals[c] + vx);
}

std::vector<double> prefix_trapezoid(const Grid1D& g, std::span<const double> vals) {
  std::vector<double> cum(g.size(), 0.0);
  for (std::size_t c = 0; c < g.cells(); ++c)
    cum[c + 1] = cum[c] + 0.5 * g.spacing(c) * (vals[c] + vals[c + 1]);
  return cum;
}

}  // namespace

Tabulated::Tabulated(std::shared_ptr<const Grid1D> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw InvalidArgument("tabulated: value count does not match grid");
  cum_ = prefix_trapezoid(*grid_, values_);
}

double Tabulated::value_at(double x) const { return interp_value(*grid_, values_, x); }

double Tabulated::cum_at(double x) const {
  return interp_cum(*grid_, values_, cum_, x);
}

double Tabulated::quantile(double p) const {
  const double target = p * total();
  if (target <= 0.0) return grid_->front();
  if (target >= total()) return grid_->back();
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  std::size_t c = static_cast<std::size_t>(it - cum_.begin());
  c = (c == 0) ? 0 : c - 1;
  if (c >= grid_->cells()) c = grid_->cells() - 1;
  const double inc = cum_[c + 1] - cum_[c];
  if (inc <= 0.0) return grid_->points[c];
  return grid_->points[c] + (target - cum_[c]) / inc * grid_->spacing(c);
}

JointModel JointModel::gaussian_direct(double sigma, Grid1D grid) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_direct: sigma must be positive");
  grid.validate();
  const double tail = normal_cdf(grid.front(), 0.0, sigma) +
                      (1.0 - normal_cdf(grid.back(), 0.0, sigma));
  if (tail > 1e-4)
    throw NumericError("gaussian_direct: grid does not cover the support "
                       "(truncated tail mass exceeds 1e-4)");
  std::vector<double> pdf(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    pdf[i] = normal_pdf(grid.points[i], 0.0, sigma);
  // Fold the analytic tail mass into the boundary nodes.
  const auto w = trapezoid_weights(grid);
  pdf.front() += normal_cdf(grid.front(), 0.0, sigma) / w.front();
  pdf.back() += (1.0 - normal_cdf(grid.back(), 0.0, sigma)) / w.back();

  JointModel m;
  m.kind_ = Kind::Direct;
  m.s_grid_ = std::make_shared<Grid1D>(std::move(grid));
  m.x_grid_ = m.s_grid_;
  m.finalize_direct(std::move(pdf));
  return m;
}

JointModel JointModel::direct_from_pdf(Grid1D grid, std::vector<double> pdf) {
  grid.validate();
  if (pdf.size() != grid.size())
    throw InvalidArgument("direct_from_pdf: pdf length does not match grid");
  for (double v : pdf)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("direct_from_pdf: density must be finite and nonnegative");
  JointModel m;
  m.kind_ = Kind::Direct;
  m.s_grid_ = std::make_shared<Grid1D>(std::move(grid));
  m.x_grid_ = m.s_grid_;
  m.finalize_direct(std::move(pdf));
  return m;
}

JointModel JointModel::gaussian_mixture(double mu1, double mu2, double s_low,
                                        double s_high, Grid1D s_grid, Grid1D x_grid) {
  if (!(s_low > 0.0))
    throw InvalidArgument("gaussian_mixture: s_low must be positive (S is a std dev)");
  if (!(s_low < s_high))
    throw InvalidArgument("gaussian_mixture: need s_low < s_high");
  s_grid.validate();
  x_grid.validate();
  if (s_grid.front() > s_low || s_grid.back() < s_high)
    throw InvalidArgument("gaussian_mixture: s grid must cover [s_low, s_high]");

  const std::size_t ns = s_grid.size(), nx = x_grid.size();
  const auto sw = trapezoid_weights(s_grid);
  const auto xw = trapezoid_weights(x_grid);
  const double prior = 1.0 / (s_high - s_low);

  std::vector<double> density(ns * nx, 0.0);
  double truncated = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    const double s = s_grid.points[i];
    if (s < s_low || s > s_high) continue;
    double* row = density.data() + i * nx;
    for (std::size_t j = 0; j < nx; ++j) {
      const double x = x_grid.points[j];
      row[j] = 0.5 * (normal_pdf(x, mu1, s) + normal_pdf(x, mu2, s));
    }
    const double tail_lo = 0.5 * (normal_cdf(x_grid.front(), mu1, s) +
                                  normal_cdf(x_grid.front(), mu2, s));
    const double tail_hi = 0.5 * ((1.0 - normal_cdf(x_grid.back(), mu1, s)) +
                                  (1.0 - normal_cdf(x_grid.back(), mu2, s)));
    truncated += sw[i] * prior * (tail_lo + tail_hi);
    row[0] += tail_lo / xw.front();
    row[nx - 1] += tail_hi / xw.back();
    for (std::size_t j = 0; j < nx; ++j) row[j] *= prior;
  }
  if (truncated > 1e-4)
    throw NumericError("gaussian_mixture: x grid does not cover the support "
                       "(truncated tail mass exceeds 1e-4)");

  JointModel m;
  m.kind_ = Kind::Indirect;
  m.s_grid_ = std::make_shared<Grid1D>(std::move(s_grid));
  m.x_grid_ = std::make_shared<Grid1D>(std::move(x_grid));
  m.density_ = std::move(density);
  m.finalize_indirect();
  return m;
}

JointModel JointModel::from_density(Grid1D s_grid, Grid1D x_grid,
                                    std::vector<double> density_row_major) {
  s_grid.validate();
  x_grid.validate();
  if (density_row_major.size() != s_grid.size() * x_grid.size())
    throw InvalidArgument("from_density: matrix shape does not match grids");
  for (double v : density_row_major)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("from_density: density must be finite and nonnegative");
  JointModel m;
  m.kind_ = Kind::Indirect;
  m.s_grid_ = std::make_shared<Grid1D>(std::move(s_grid));
  m.x_grid_ = std::make_shared<Grid1D>(std::move(x_grid));
  m.density_ = std::move(density_row_major);
  m.finalize_indirect();
  return m;
}

JointModel JointModel::gaussian_direct_default(double sigma, std::size_t resolution) {
  return gaussian_direct(sigma, Grid1D::uniform(-6.0 * sigma, 6.0 * sigma, resolution));
}

JointModel JointModel::gaussian_mixture_default(double mu1, double mu2, double s_low,
                                                double s_high, std::size_t s_resolution,
                                                std::size_t x_resolution) {
  const double lo = std::min(mu1, mu2) - 6.0 * s_high;
  const double hi = std::max(mu1, mu2) + 6.0 * s_high;
  return gaussian_mixture(mu1, mu2, s_low, s_high,
                          Grid1D::uniform(s_low, s_high, s_resolution),
                          Grid1D::uniform(lo, hi, x_resolution));
}

void JointModel::finalize_direct(std::vector<double> pdf) {
  const Grid1D& g = *s_grid_;
  s_w_ = trapezoid_weights(g);
  double z = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) z += s_w_[i] * pdf[i];
  if (!(z > 0.0) || !std::isfinite(z))
    throw NumericError("model: density does not normalize");
  for (double& v : pdf) v /= z;

  std::vector<double> m1(g.size()), m2(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    m1[i] = g.points[i] * pdf[i];
    m2[i] = g.points[i] * g.points[i] * pdf[i];
  }
  s_prior_ = pdf;
  g_values_ = g.points;
  xm0_ = Tabulated(s_grid_, std::move(pdf));
  xm1_ = Tabulated(s_grid_, std::move(m1));
  xm2_ = Tabulated(s_grid_, std::move(m2));
  s_mean_ = xm1_.total();
  s_var_ = std::max(0.0, xm2_.total() - s_mean_ * s_mean_);
}

void JointModel::finalize_indirect() {
  const Grid1D& gs = *s_grid_;
  const Grid1D& gx = *x_grid_;
  const std::size_t ns = gs.size(), nx = gx.size();
  s_w_ = trapezoid_weights(gs);
  const auto xw = trapezoid_weights(gx);

  double z = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    const double* row = density_.data() + i * nx;
    double acc = 0.0;
    for (std::size_t j = 0; j < nx; ++j) acc += xw[j] * row[j];
    z += s_w_[i] * acc;
  }
  if (!(z > 0.0) || !std::isfinite(z))
    throw NumericError("model: density does not normalize");
  for (double& v : density_) v /= z;

  row_cum_.assign(ns * nx, 0.0);
  row_total_.assign(ns, 0.0);
  s_prior_.assign(ns, 0.0);
  for (std::size_t i = 0; i < ns; ++i) {
    const double* row = density_.data() + i * nx;
    double* cum = row_cum_.data() + i * nx;
    for (std::size_t c = 0; c + 1 < nx; ++c)
      cum[c + 1] = cum[c] + 0.5 * gx.spacing(c) * (row[c] + row[c + 1]);
    row_total_[i] = cum[nx - 1];
    s_prior_[i] = row_total_[i];
  }

  std::vector<double> m0(nx, 0.0), m1(nx, 0.0), m2(nx, 0.0);
  for (std::size_t i = 0; i < ns; ++i) {
    const double* row = density_.data() + i * nx;
    const double ws = s_w_[i];
    const double s = gs.points[i];
    for (std::size_t j = 0; j < nx; ++j) {
      const double d = ws * row[j];
      m0[j] += d;
      m1[j] += s * d;
      m2[j] += s * s * d;
    }
  }
  g_values_.assign(nx, 0.0);
  const double s_lo = gs.front(), s_hi = gs.back();
  for (std::size_t j = 0; j < nx; ++j) {
    double gj = (m0[j] > 1e-300) ? m1[j] / m0[j] : 0.5 * (s_lo + s_hi);
    g_values_[j] = std::clamp(gj, s_lo, s_hi);
  }
  xm0_ = Tabulated(x_grid_, std::move(m0));
  xm1_ = Tabulated(x_grid_, std::move(m1));
  xm2_ = Tabulated(x_grid_, std::move(m2));
  s_mean_ = xm1_.total();
  s_var_ = std::max(0.0, xm2_.total() - s_mean_ * s_mean_);
}

double JointModel::g(double x) const {
  return interp_value(x_grid(), g_values_, x);
}

std::span<const double> JointModel::g_values() const { return g_values_; }

std::span<const double> JointModel::s_prior() const { return s_prior_; }

IntervalStats JointModel::interval_stats(double lo, double hi) const {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw InvalidArgument("interval_stats: reversed interval");
  const Grid1D& gx = x_grid();
  const double clo = std::clamp(lo, gx.front(), gx.back());
  const double chi = std::clamp(hi, gx.front(), gx.back());

  IntervalStats st;
  st.prob = std::max(0.0, xm0_.cum_at(chi) - xm0_.cum_at(clo));
  const double s_lo = s_grid().front(), s_hi = s_grid().back();
  if (st.prob < kProbFloor) {
    st.degenerate = true;
    st.mean = std::clamp(g(0.5 * (clo + chi)), s_lo, s_hi);
    st.var = 0.0;
    return st;
  }
  st.mean = (xm1_.cum_at(chi) - xm1_.cum_at(clo)) / st.prob;
  st.mean = std::clamp(st.mean, s_lo, s_hi);
  st.var = std::max(0.0, (xm2_.cum_at(chi) - xm2_.cum_at(clo)) / st.prob -
                             st.mean * st.mean);
  return st;
}

double JointModel::mmse_floor() const {
  if (kind_ == Kind::Direct) return 0.0;
  const Grid1D& gx = x_grid();
  const auto xw = trapezoid_weights(gx);
  auto m0 = xm0_.values();
  auto m1 = xm1_.values();
  auto m2 = xm2_.values();
  double acc = 0.0;
  for (std::size_t j = 0; j < gx.size(); ++j) {
    if (m0[j] <= 1e-300) continue;
    acc += xw[j] * std::max(0.0, m2[j] - m1[j] * m1[j] / m0[j]);
  }
  return acc;
}

void JointModel::cell_moments(std::size_t c, double* p, double* m1, double* m2) const {
  *p = xm0_.cum()[c + 1] - xm0_.cum()[c];
  *m1 = xm1_.cum()[c + 1] - xm1_.cum()[c];
  *m2 = xm2_.cum()[c + 1] - xm2_.cum()[c];
}

double JointModel::cond_density(std::size_t si, double x) const {
  if (kind_ != Kind::Indirect)
    throw InvalidArgument("cond_density: needs an indirect model");
  const double tot = row_total_[si];
  if (tot <= 1e-300) return 0.0;
  const std::size_t nx = x_grid().size();
  std::span<const double> row(density_.data() + si * nx, nx);
  return interp_value(x_grid(), row, x) / tot;
}

double JointModel::cond_cum(std::size_t si, double x) const {
  if (kind_ != Kind::Indirect)
    throw InvalidArgument("cond_cum: needs an indirect model");
  const double tot = row_total_[si];
  if (tot <= 1e-300) return 0.0;
  const std::size_t nx = x_grid().size();
  std::span<const double> row(density_.data() + si * nx, nx);
  std::span<const double> cum(row_cum_.data() + si * nx, nx);
  return interp_cum(x_grid(), row, cum, x) / tot;
}

void JointModel::cond_density_all(double x, std::span<double> out) const {
  if (kind_ != Kind::Indirect)
    throw InvalidArgument("cond_density_all: needs an indirect model");
  const Grid1D& gx = x_grid();
  const std::size_t ns = s_grid().size(), nx = gx.size();
  const double cx = std::clamp(x, gx.front(), gx.back());
  const std::size_t c = gx.cell_of(cx);
  const double t = (cx - gx.points[c]) / gx.spacing(c);
  for (std::size_t i = 0; i < ns; ++i) {
    const double tot = row_total_[i];
    if (tot <= 1e-300) {
      out[i] = 0.0;
      continue;
    }
    const double* row = density_.data() + i * nx;
    out[i] = (row[c] + (row[c + 1] - row[c]) * t) / tot;
  }
}

void JointModel::cond_cum_all(double x, std::span<double> out) const {
  if (kind_ != Kind::Indirect)
    throw InvalidArgument("cond_cum_all: needs an indirect model");
  const Grid1D& gx = x_grid();
  const std::size_t ns = s_grid().size(), nx = gx.size();
  if (x <= gx.front()) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(ns), 0.0);
    return;
  }
  if (x >= gx.back()) {
    for (std::size_t i = 0; i < ns; ++i)
      out[i] = (row_total_[i] > 1e-300) ? 1.0 : 0.0;
    return;
  }
  const std::size_t c = gx.cell_of(x);
  const double dx = x - gx.points[c];
  const double t = dx / gx.spacing(c);
  for (std::size_t i = 0; i < ns; ++i) {
    const double tot = row_total_[i];
    if (tot <= 1e-300) {
      out[i] = 0.0;
      continue;
    }
    const double* row = density_.data() + i * nx;
    const double* cum = row_cum_.data() + i * nx;
    const double vx = row[c] + (row[c + 1] - row[c]) * t;
    out[i] = (cum[c] + 0.5 * dx * (row[c] + vx)) / tot;
  }
}

namespace {

// Density-file layout: two header lines with the s and x grid coordinates,
// then one whitespace-separated row of f(s_i, x_j) per s node.
std::vector<double> parse_number_line(const std::string& line, const char* what) {
  std::istringstream ss(line);
  std::vector<double> out;
  double v;
  while (ss >> v) out.push_back(v);
  if (!ss.eof())
    throw ConfigError(std::string("density file: malformed ") + what + " line");
  return out;
}

}  // namespace

JointModel JointModel::load_density_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("density file: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("density file: missing s header");
  auto s_pts = parse_number_line(line, "s grid");
  if (!std::getline(in, line)) throw ConfigError("density file: missing x header");
  auto x_pts = parse_number_line(line, "x grid");
  std::vector<double> density;
  density.reserve(s_pts.size() * x_pts.size());
  double v;
  while (in >> v) density.push_back(v);
  if (density.size() != s_pts.size() * x_pts.size())
    throw ConfigError("density file: expected " +
                      std::to_string(s_pts.size() * x_pts.size()) + " values, got " +
                      std::to_string(density.size()));
  return from_density(Grid1D(std::move(s_pts)), Grid1D(std::move(x_pts)),
                      std::move(density));
}

void JointModel::save_density_file(const JointModel& m, const std::string& path) {
  if (m.kind() != Kind::Indirect)
    throw InvalidArgument("save_density_file: needs an indirect model");
  std::ofstream out(path);
  if (!out) throw IoError("density file: cannot write '" + path + "'");
  char buf[40];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
  };
  const auto& sp = m.s_grid().points;
  const auto& xp = m.x_grid().points;
  for (std::size_t i = 0; i < sp.size(); ++i) put(sp[i], i + 1 < sp.size() ? ' ' : '\n');
  for (std::size_t j = 0; j < xp.size(); ++j) put(xp[j], j + 1 < xp.size() ? ' ' : '\n');
  for (std::size_t i = 0; i < sp.size(); ++i)
    for (std::size_t j = 0; j < xp.size(); ++j)
      put(m.density_[i * xp.size() + j], j + 1 < xp.size() ? ' ' : '\n');
}

TransformedModel::TransformedModel(const JointModel& base, std::size_t u_resolution)
    : base_(&base) {
  if (u_resolution < 2)
    throw InvalidArgument("transform_to_u: u_resolution must be >= 2");
  auto gv = base.g_values();
  double gmin = kInf, gmax = -kInf;
  for (double v : gv) {
    gmin = std::min(gmin, v);
    gmax = std::max(gmax, v);
  }
  degenerate_ = !(gmax - gmin > 1e-12 * std::max(1.0, std::abs(gmin) + std::abs(gmax)));
  if (degenerate_) {
    const double pad = std::max(1.0, std::abs(gmin)) * 1e-9;
    gmin -= pad;
    gmax += pad;
  }
  u_grid_ = Grid1D::uniform(gmin, gmax, u_resolution);

  const std::size_t ncells = base.x_grid().cells();
  std::vector<double> gmid(ncells);
  for (std::size_t c = 0; c < ncells; ++c) gmid[c] = 0.5 * (gv[c] + gv[c + 1]);

  order_.resize(ncells);
  for (std::size_t c = 0; c < ncells; ++c) order_[c] = c;
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return gmid[a] < gmid[b]; });
  g_sorted_.resize(ncells);
  a0_.assign(ncells + 1, 0.0);
  a1_.assign(ncells + 1, 0.0);
  a2_.assign(ncells + 1, 0.0);
  for (std::size_t r = 0; r < ncells; ++r) {
    g_sorted_[r] = gmid[order_[r]];
    double p, m1, m2;
    base.cell_moments(order_[r], &p, &m1, &m2);
    a0_[r + 1] = a0_[r] + p;
    a1_[r + 1] = a1_[r] + m1;
    a2_[r + 1] = a2_[r] + m2;
  }

  // Binned f_SU view: assign every integration cell to the u-cell holding its
  // g value (closed-left/open-right), then merge contiguous x runs.
  u_cells_.assign(u_grid_.cells(), UCell{});
  std::vector<std::vector<std::size_t>> members(u_grid_.cells());
  for (std::size_t c = 0; c < ncells; ++c) {
    const std::size_t k = u_grid_.cell_of(gmid[c]);
    double p, m1, m2;
    base.cell_moments(c, &p, &m1, &m2);
    u_cells_[k].prob += p;
    u_cells_[k].m1 += m1;
    u_cells_[k].m2 += m2;
    members[k].push_back(c);
  }
  const auto& xp = base.x_grid().points;
  for (std::size_t k = 0; k < u_cells_.size(); ++k) {
    const auto& ms = members[k];
    for (std::size_t a = 0; a < ms.size();) {
      std::size_t b = a;
      while (b + 1 < ms.size() && ms[b + 1] == ms[b] + 1) ++b;
      u_cells_[k].x_intervals.push_back({xp[ms[a]], xp[ms[b] + 1]});
      a = b + 1;
    }
  }
}

std::size_t TransformedModel::cut_of(double v) const {
  const auto it = std::lower_bound(g_sorted_.begin(), g_sorted_.end(), v);
  return static_cast<std::size_t>(it - g_sorted_.begin());
}

void TransformedModel::range_moments(std::size_t r0, std::size_t r1, double* p,
                                     double* m1, double* m2) const {
  *p = a0_[r1] - a0_[r0];
  *m1 = a1_[r1] - a1_[r0];
  *m2 = a2_[r1] - a2_[r0];
}

double TransformedModel::range_partial_mse(std::size_t r0, std::size_t r1) const {
  double p, m1, m2;
  range_moments(r0, r1, &p, &m1, &m2);
  if (p < kProbFloor) return 0.0;
  return std::max(0.0, m2 - m1 * m1 / p);
}

double TransformedModel::range_centroid(std::size_t r0, std::size_t r1) const {
  double p, m1, m2;
  range_moments(r0, r1, &p, &m1, &m2);
  const double s_lo = base_->s_grid().front(), s_hi = base_->s_grid().back();
  if (p < kProbFloor) {
    const double a = g_sorted_[std::min(r0, g_sorted_.size() - 1)];
    const double b = g_sorted_[std::min(r1 > 0 ? r1 - 1 : 0, g_sorted_.size() - 1)];
    return std::clamp(0.5 * (a + b), s_lo, s_hi);
  }
  return std::clamp(m1 / p, s_lo, s_hi);
}

std::vector<XInterval> TransformedModel::range_intervals(std::size_t r0,
                                                         std::size_t r1) const {
  std::vector<std::size_t> cells(order_.begin() + static_cast<std::ptrdiff_t>(r0),
                                 order_.begin() + static_cast<std::ptrdiff_t>(r1));
  std::sort(cells.begin(), cells.end());
  std::vector<XInterval> out;
  const auto& xp = base_->x_grid().points;
  for (std::size_t a = 0; a < cells.size();) {
    std::size_t b = a;
    while (b + 1 < cells.size() && cells[b + 1] == cells[b] + 1) ++b;
    out.push_back({xp[cells[a]], xp[cells[b] + 1]});
    a = b + 1;
  }
  return out;
}

TransformedModel transform_to_u(const JointModel& model, std::size_t u_resolution) {
  return TransformedModel(model, u_resolution);
}

}  // namespace iquant
