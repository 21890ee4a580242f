#include "core/iterative.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "core/errors.hpp"

namespace iquant {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

InitPolicy InitPolicy::parse(const std::string& text, std::uint64_t seed) {
  if (text.empty() || text == "uniform-quantile") return quantile();
  if (text == "uniform-in-range") return in_range();
  if (text == "random") return random(seed);
  if (text.rfind("list:", 0) == 0) {
    std::vector<double> vals;
    std::string item;
    std::istringstream ss(text.substr(5));
    while (std::getline(ss, item, ',')) {
      try {
        vals.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("init: bad threshold value '" + item + "'");
      }
    }
    if (vals.empty()) throw ConfigError("init: empty threshold list");
    return user_list(std::move(vals));
  }
  throw ConfigError("init: unknown policy '" + text + "'");
}

std::string InitPolicy::name() const {
  switch (kind) {
    case Kind::UniformQuantile: return "uniform-quantile";
    case Kind::UniformInRange: return "uniform-in-range";
    case Kind::Random: return "random";
    case Kind::User: return "user";
  }
  return "?";
}

std::vector<double> initial_thresholds(const JointModel& m, int T, const InitPolicy& p) {
  if (T < 1) throw InvalidArgument("init: need T >= 1");
  const double lo = m.x_grid().front(), hi = m.x_grid().back();
  std::vector<double> t(static_cast<std::size_t>(T));
  switch (p.kind) {
    case InitPolicy::Kind::UniformQuantile:
      for (int k = 1; k <= T; ++k)
        t[static_cast<std::size_t>(k - 1)] =
            m.x_quantile(static_cast<double>(k) / static_cast<double>(T + 1));
      break;
    case InitPolicy::Kind::UniformInRange:
      for (int k = 1; k <= T; ++k)
        t[static_cast<std::size_t>(k - 1)] =
            lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(T + 1);
      break;
    case InitPolicy::Kind::Random: {
      std::mt19937_64 rng(p.seed);
      std::uniform_real_distribution<double> dist(lo, hi);
      for (auto& v : t) v = dist(rng);
      std::sort(t.begin(), t.end());
      break;
    }
    case InitPolicy::Kind::User: {
      if (static_cast<int>(p.user.size()) != T)
        throw ConfigError("init: user threshold list length does not match T");
      t = p.user;
      std::sort(t.begin(), t.end());
      break;
    }
  }
  // Enforce strict ordering inside the grid range.
  const double sep = 1e-9 * (hi - lo);
  t.front() = std::clamp(t.front(), lo + sep, hi - sep);
  for (std::size_t i = 1; i < t.size(); ++i)
    t[i] = std::clamp(std::max(t[i], t[i - 1] + sep), lo + sep, hi - sep);
  for (std::size_t i = t.size(); i-- > 1;)
    if (!(t[i - 1] < t[i])) t[i - 1] = t[i] - sep;
  return t;
}

RootResult solve_threshold(const JointModel& m, double target, double lo, double hi,
                           double prev) {
  if (!(lo < hi)) throw InvalidArgument("solve_threshold: empty bracket");
  const Grid1D& gx = m.x_grid();
  const double clo = std::max(lo, gx.front());
  const double chi = std::min(hi, gx.back());
  if (!(clo < chi)) return {0.5 * (std::max(lo, gx.front()) + std::min(hi, gx.back())), true};

  // Scan points: bracket ends plus every grid node strictly inside.
  std::vector<double> xs;
  xs.push_back(clo);
  for (double p : gx.points) {
    if (p > clo && p < chi) xs.push_back(p);
  }
  xs.push_back(chi);

  std::vector<double> roots;
  double best_x = xs.front();
  double best_d = kInf;
  double d_prev = m.g(xs.front()) - target;
  if (std::abs(d_prev) < best_d) {
    best_d = std::abs(d_prev);
    best_x = xs.front();
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double d_cur = m.g(xs[i]) - target;
    if (std::abs(d_cur) < best_d) {
      best_d = std::abs(d_cur);
      best_x = xs[i];
    }
    if (d_prev == 0.0) {
      roots.push_back(xs[i - 1]);
    } else if (d_prev * d_cur < 0.0) {
      double a = xs[i - 1], b = xs[i];
      double da = d_prev;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + b);
        const double dm = m.g(mid) - target;
        if (da * dm <= 0.0) {
          b = mid;
        } else {
          a = mid;
          da = dm;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    d_prev = d_cur;
  }
  if (d_prev == 0.0) roots.push_back(xs.back());

  if (roots.empty()) return {best_x, true};
  double pick = roots.front();
  for (double r : roots) {
    const double dr = std::abs(r - prev), dp = std::abs(pick - prev);
    if (dr < dp || (dr == dp && r < pick)) pick = r;
  }
  return {pick, false};
}

std::string IterationTrace::to_csv() const {
  std::ostringstream out;
  out << "# iquant-csv v1\n";
  out << "iter,mse";
  const std::size_t T = steps.empty() ? 0 : steps.front().thresholds.size();
  for (std::size_t k = 1; k <= T; ++k) out << ",t_" << k;
  out << "\n";
  char buf[40];
  for (const IterSnapshot& s : steps) {
    out << s.iter;
    std::snprintf(buf, sizeof buf, "%.17g", s.mse);
    out << ',' << buf;
    for (double t : s.thresholds) {
      std::snprintf(buf, sizeof buf, "%.17g", t);
      out << ',' << buf;
    }
    out << "\n";
  }
  return out.str();
}

LloydResult lloyd_indirect(const JointModel& m, int T, const InitPolicy& init,
                           double eps, int max_iter) {
  if (T < 1) throw InvalidArgument("lloyd_indirect: need T >= 1");
  if (max_iter < 1) throw InvalidArgument("lloyd_indirect: need max_iter >= 1");
  const Grid1D& gx = m.x_grid();
  if (static_cast<std::size_t>(T) >= gx.size())
    throw InvalidArgument("lloyd_indirect: T exceeds the model resolution");

  std::vector<double> t = initial_thresholds(m, T, init);
  std::vector<double> recon = centroids_for(m, t);

  Quantizer q{Domain::X, t, recon};
  double mse = evaluate_mse(m, q);

  IterationTrace trace;
  trace.steps.push_back({0, mse, t, recon, false, false});

  double mse_prev = kInf;
  int iter = 0;
  bool last_stalled = false;
  while (mse_prev - mse > eps && iter < max_iter) {
    mse_prev = mse;
    ++iter;
    recon = centroids_for(m, t);
    bool stalled = false, clamped = false;
    for (std::size_t l = 0; l < t.size(); ++l) {
      const double lo = (l == 0) ? -kInf : t[l - 1];
      const double hi = (l + 1 < t.size()) ? t[l + 1] : kInf;
      const double target = 0.5 * (recon[l] + recon[l + 1]);
      const RootResult r = solve_threshold(m, target, lo, hi, t[l]);
      stalled = stalled || r.stalled;
      double nt = r.value;
      if (!(nt > lo) || !(nt < hi)) {
        // Ordering violation: clamp to the midpoint of the neighbors.
        const double a = std::max(lo, gx.front());
        const double b = std::min(hi, gx.back());
        nt = 0.5 * (a + b);
        clamped = true;
      }
      t[l] = nt;
    }
    q.thresholds = t;
    q.recon = recon;
    mse = evaluate_mse(m, q);
    trace.steps.push_back({iter, mse, t, recon, stalled, clamped});
    last_stalled = stalled;
  }

  trace.iterations = iter;
  if (mse_prev - mse <= eps) {
    trace.converged = !last_stalled;
    trace.stop_reason = last_stalled ? StopReason::StalledRoot : StopReason::MseDelta;
  } else {
    trace.converged = false;
    trace.stop_reason = StopReason::MaxIter;
  }

  // Final centroid pass so the reported quantizer is a consistent pair.
  recon = centroids_for(m, t);
  q.thresholds = t;
  q.recon = recon;
  mse = evaluate_mse(m, q);
  return {q, mse, std::move(trace)};
}

}  // namespace iquant
