#include "core/types_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "core/errors.hpp"

namespace iquant {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t binom_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) /
                                   static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace

double TypeVector::class_size_value() const {
  return class_size > 0 ? static_cast<double>(class_size) : std::exp(log_class_size);
}

std::vector<TypeVector> enumerate_types(int n, int L) {
  if (n < 0 || L < 1) throw InvalidArgument("enumerate_types: need n >= 0, L >= 1");
  std::vector<TypeVector> out;
  std::vector<int> counts(static_cast<std::size_t>(L), 0);
  auto emit = [&]() {
    TypeVector tv;
    tv.counts = counts;
    tv.n = n;
    tv.log_class_size = std::lgamma(static_cast<double>(n) + 1.0);
    for (int c : counts) tv.log_class_size -= std::lgamma(static_cast<double>(c) + 1.0);
    if (n <= kLogSpaceN) {
      // Multinomial coefficient as a product of binomials over partial sums.
      std::uint64_t cs = 1;
      int seen = 0;
      for (int c : counts) {
        seen += c;
        cs *= binom_u64(seen, c);
      }
      tv.class_size = cs;
    }
    out.push_back(std::move(tv));
  };
  auto rec = [&](auto&& self, std::size_t k, int remaining) -> void {
    if (k + 1 == static_cast<std::size_t>(L)) {
      counts[k] = remaining;
      emit();
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[k] = c;
      self(self, k + 1, remaining - c);
    }
  };
  rec(rec, 0, n);
  return out;
}

SymbolChannel::SymbolChannel(const JointModel& m, std::span<const double> thresholds)
    : levels_(thresholds.size() + 1), s_nodes_(m.s_nodes()) {
  for (std::size_t i = 0; i + 1 < thresholds.size(); ++i)
    if (!(thresholds[i] < thresholds[i + 1]))
      throw InvalidArgument("symbol channel: thresholds must be strictly increasing");
  p_.assign(levels_ * s_nodes_, 0.0);
  std::vector<double> prev(s_nodes_, 0.0), cur(s_nodes_, 0.0);
  for (std::size_t l = 0; l < levels_; ++l) {
    if (l < thresholds.size()) {
      m.cond_cum_all(thresholds[l], cur);
    } else {
      std::fill(cur.begin(), cur.end(), 1.0);
    }
    for (std::size_t i = 0; i < s_nodes_; ++i)
      p_[i * levels_ + l] = std::max(0.0, cur[i] - prev[i]);
    std::swap(prev, cur);
  }
}

TypeEngine::TypeEngine(const JointModel& m, int n, int L) : model_(&m), n_(n), L_(L) {
  if (n < 1 || L < 1) throw InvalidArgument("type engine: need n >= 1, L >= 1");
  if (m.kind() != JointModel::Kind::Indirect)
    throw InvalidArgument("type engine: needs an indirect model");
  types_ = enumerate_types(n, L);
  face_types_ = enumerate_types(n - 1, L);

  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t q = 0; q < types_.size(); ++q) index[types_[q].counts] = q;
  lift_.assign(face_types_.size() * static_cast<std::size_t>(L), 0);
  std::vector<int> probe;
  for (std::size_t f = 0; f < face_types_.size(); ++f) {
    for (int sym = 0; sym < L; ++sym) {
      probe = face_types_[f].counts;
      ++probe[static_cast<std::size_t>(sym)];
      lift_[f * static_cast<std::size_t>(L) + static_cast<std::size_t>(sym)] =
          index.at(probe);
    }
  }

  auto sw = m.s_weights();
  auto prior = m.s_prior();
  bw_.resize(m.s_nodes());
  for (std::size_t i = 0; i < bw_.size(); ++i) bw_[i] = sw[i] * prior[i];
}

void TypeEngine::sequence_probs(const SymbolChannel& ch,
                                const std::vector<TypeVector>& set, std::size_t si,
                                std::vector<double>* out) const {
  const int n = set.empty() ? 0 : set.front().n;
  out->resize(set.size());
  auto row = ch.row(si);
  if (n <= kLogSpaceN) {
    // Shared power tables: pw[sym][k] = P(sym|s_i)^k.
    const std::size_t L = row.size();
    static thread_local std::vector<double> pw;
    pw.assign(L * static_cast<std::size_t>(n + 1), 1.0);
    for (std::size_t sym = 0; sym < L; ++sym)
      for (int k = 1; k <= n; ++k)
        pw[sym * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(k)] =
            pw[sym * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(k - 1)] *
            row[sym];
    for (std::size_t q = 0; q < set.size(); ++q) {
      double p = 1.0;
      const auto& counts = set[q].counts;
      for (std::size_t sym = 0; sym < L; ++sym)
        p *= pw[sym * static_cast<std::size_t>(n + 1) +
                static_cast<std::size_t>(counts[sym])];
      (*out)[q] = p;
    }
  } else {
    for (std::size_t q = 0; q < set.size(); ++q) {
      double lp = 0.0;
      bool zero = false;
      const auto& counts = set[q].counts;
      for (std::size_t sym = 0; sym < row.size(); ++sym) {
        if (counts[sym] == 0) continue;
        if (row[sym] <= 0.0) {
          zero = true;
          break;
        }
        lp += counts[sym] * std::log(row[sym]);
      }
      (*out)[q] = zero ? 0.0 : std::exp(lp);
    }
  }
}

void TypeEngine::posteriors(const SymbolChannel& ch, std::vector<double>* prob,
                            std::vector<double>* shat) const {
  const std::size_t nq = types_.size();
  prob->assign(nq, 0.0);
  std::vector<double> m1(nq, 0.0);
  std::vector<double> seq;
  const auto& sp = model_->s_grid().points;
  for (std::size_t i = 0; i < bw_.size(); ++i) {
    if (bw_[i] <= 0.0) continue;
    sequence_probs(ch, types_, i, &seq);
    const double w = bw_[i], ws = bw_[i] * sp[i];
    for (std::size_t q = 0; q < nq; ++q) {
      (*prob)[q] += w * seq[q];
      m1[q] += ws * seq[q];
    }
  }
  shat->assign(nq, 0.0);
  const double s_lo = model_->s_grid().front(), s_hi = model_->s_grid().back();
  for (std::size_t q = 0; q < nq; ++q) {
    if ((*prob)[q] * types_[q].class_size_value() < kProbFloor) {
      // Empty type: fall back to the prior mean, clamped to the source range.
      (*shat)[q] = std::clamp(model_->s_mean(), s_lo, s_hi);
    } else {
      (*shat)[q] = std::clamp(m1[q] / (*prob)[q], s_lo, s_hi);
    }
  }
}

double TypeEngine::mse(const SymbolChannel& ch, std::span<const double> shat) const {
  if (shat.size() != types_.size())
    throw InvalidArgument("type engine: shat length mismatch");
  const auto& sp = model_->s_grid().points;
  std::vector<double> acc(types_.size(), 0.0);
  std::vector<double> seq;
  for (std::size_t i = 0; i < bw_.size(); ++i) {
    if (bw_[i] <= 0.0) continue;
    sequence_probs(ch, types_, i, &seq);
    const double s = sp[i];
    for (std::size_t q = 0; q < types_.size(); ++q) {
      const double d = s - shat[q];
      acc[q] += bw_[i] * d * d * seq[q];
    }
  }
  double total = 0.0;
  for (std::size_t q = 0; q < types_.size(); ++q)
    total += types_[q].class_size_value() * acc[q];
  return total;
}

double TypeEngine::boundary_b1(const SymbolChannel& ch,
                               std::span<const double> thresholds,
                               std::span<const double> shat, int ell) const {
  if (ell < 1 || static_cast<std::size_t>(ell) > thresholds.size())
    throw InvalidArgument("boundary_b1: threshold index out of range");
  const double t = thresholds[static_cast<std::size_t>(ell - 1)];
  const std::size_t lo_sym = static_cast<std::size_t>(ell - 1);
  const std::size_t hi_sym = static_cast<std::size_t>(ell);

  std::vector<double> fts(bw_.size());
  model_->cond_density_all(t, fts);
  const auto& sp = model_->s_grid().points;

  std::vector<double> seq;
  double b1 = 0.0;
  for (std::size_t i = 0; i < bw_.size(); ++i) {
    const double w = bw_[i] * fts[i];
    if (w == 0.0) continue;
    sequence_probs(ch, face_types_, i, &seq);
    double acc = 0.0;
    for (std::size_t f = 0; f < face_types_.size(); ++f) {
      const double s_lo = shat[lift_index(f, lo_sym)];
      const double s_hi = shat[lift_index(f, hi_sym)];
      const double delta = s_hi - s_lo;
      if (delta == 0.0) continue;
      const double mid = 0.5 * (s_hi + s_lo);
      acc += face_types_[f].class_size_value() * seq[f] * delta * (mid - sp[i]);
    }
    b1 += w * acc;
  }
  return b1;
}

std::pair<double, double> type_posterior(const JointModel& m, const SymbolChannel& ch,
                                         const TypeVector& Q) {
  if (Q.counts.size() != ch.levels())
    throw InvalidArgument("type_posterior: type/channel level mismatch");
  auto sw = m.s_weights();
  auto prior = m.s_prior();
  const auto& sp = m.s_grid().points;
  double p = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const double w = sw[i] * prior[i];
    if (w <= 0.0) continue;
    auto row = ch.row(i);
    double seq;
    if (Q.n <= kLogSpaceN) {
      seq = 1.0;
      for (std::size_t sym = 0; sym < row.size(); ++sym)
        for (int k = 0; k < Q.counts[sym]; ++k) seq *= row[sym];
    } else {
      double lp = 0.0;
      bool zero = false;
      for (std::size_t sym = 0; sym < row.size(); ++sym) {
        if (Q.counts[sym] == 0) continue;
        if (row[sym] <= 0.0) {
          zero = true;
          break;
        }
        lp += Q.counts[sym] * std::log(row[sym]);
      }
      seq = zero ? 0.0 : std::exp(lp);
    }
    p += w * seq;
    m1 += w * sp[i] * seq;
  }
  const double s_lo = m.s_grid().front(), s_hi = m.s_grid().back();
  double shat = (p * std::max(1.0, Q.class_size_value()) < kProbFloor)
                    ? std::clamp(m.s_mean(), s_lo, s_hi)
                    : std::clamp(m1 / p, s_lo, s_hi);
  return {p, shat};
}

double boundary_b1(const JointModel& m, const SymbolChannel& ch,
                   std::span<const double> thresholds, int n, int ell) {
  TypeEngine eng(m, n, static_cast<int>(thresholds.size()) + 1);
  std::vector<double> prob, shat;
  eng.posteriors(ch, &prob, &shat);
  return eng.boundary_b1(ch, thresholds, shat, ell);
}

double evaluate_vector_mse(const JointModel& m, const VectorDesign& d) {
  if (d.thresholds.empty()) return m.s_var();
  TypeEngine eng(m, d.n, static_cast<int>(d.thresholds.size()) + 1);
  SymbolChannel ch(m, d.thresholds);
  return eng.mse(ch, d.recon_by_type);
}

std::string VectorDesign::type_table_csv() const {
  std::ostringstream out;
  out << "# iquant-csv v1\n";
  const std::size_t L = types.empty() ? 0 : types.front().counts.size();
  for (std::size_t l = 1; l <= L; ++l) out << "c_" << l << ',';
  out << "class_size,prob,shat\n";
  char buf[40];
  for (std::size_t q = 0; q < types.size(); ++q) {
    for (int c : types[q].counts) out << c << ',';
    std::snprintf(buf, sizeof buf, "%.17g", types[q].class_size_value());
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", type_prob[q]);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", recon_by_type[q]);
    out << buf << '\n';
  }
  return out.str();
}

// Threshold update helper: scan B1 on the grid nodes inside the bracket, then
// bisect each sign change; nearest root to prev wins, no root flags a stall.
namespace {

class B1Solver {
public:
  B1Solver(const TypeEngine& eng, const SymbolChannel& ch,
           std::span<const double> thresholds, std::span<const double> shat, int ell)
      : model_(&eng.model()) {
    const std::size_t lo_sym = static_cast<std::size_t>(ell - 1);
    const std::size_t hi_sym = static_cast<std::size_t>(ell);
    const std::size_t ns = model_->s_nodes();
    const auto& faces = eng.face_types();
    const int n1 = eng.n() - 1;

    lo_cum_.assign(ns, 0.0);
    hi_cum_.assign(ns, 1.0);
    if (ell >= 2) model_->cond_cum_all(thresholds[lo_sym - 1], lo_cum_);
    if (static_cast<std::size_t>(ell) < thresholds.size())
      model_->cond_cum_all(thresholds[hi_sym], hi_cum_);

    // tau-independent per-(face, s) residue: class size, recon deltas and the
    // product over the untouched symbols.
    d_.resize(faces.size());
    e_.resize(faces.size());
    a_.resize(faces.size());
    b_.resize(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const double s_lo = shat[eng.lift_index(f, lo_sym)];
      const double s_hi = shat[eng.lift_index(f, hi_sym)];
      const double cs = faces[f].class_size_value();
      d_[f] = cs * (s_hi - s_lo);
      e_[f] = d_[f] * 0.5 * (s_hi + s_lo);
      a_[f] = faces[f].counts[lo_sym];
      b_[f] = faces[f].counts[hi_sym];
    }
    rest_.assign(faces.size() * ns, 0.0);
    max_pow_ = n1;
    for (std::size_t i = 0; i < ns; ++i) {
      auto row = ch.row(i);
      double* rest = rest_.data() + i * faces.size();
      for (std::size_t f = 0; f < faces.size(); ++f) {
        double p = 1.0;
        for (std::size_t sym = 0; sym < row.size(); ++sym) {
          if (sym == lo_sym || sym == hi_sym) continue;
          for (int k = 0; k < faces[f].counts[sym]; ++k) p *= row[sym];
        }
        rest[f] = p;
      }
    }
    auto sw = model_->s_weights();
    auto prior = model_->s_prior();
    bw_.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) bw_[i] = sw[i] * prior[i];
    fts_.resize(ns);
    cum_t_.resize(ns);
    pw_lo_.resize(static_cast<std::size_t>(max_pow_) + 1);
    pw_hi_.resize(static_cast<std::size_t>(max_pow_) + 1);
  }

  double operator()(double tau) const {
    model_->cond_density_all(tau, fts_);
    model_->cond_cum_all(tau, cum_t_);
    const std::size_t ns = bw_.size();
    const std::size_t nf = d_.size();
    const auto& sp = model_->s_grid().points;
    double b1 = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
      const double w = bw_[i] * fts_[i];
      if (w == 0.0) continue;
      const double pa = std::max(0.0, cum_t_[i] - lo_cum_[i]);
      const double pb = std::max(0.0, hi_cum_[i] - cum_t_[i]);
      pw_lo_[0] = 1.0;
      pw_hi_[0] = 1.0;
      for (int k = 1; k <= max_pow_; ++k) {
        pw_lo_[static_cast<std::size_t>(k)] = pw_lo_[static_cast<std::size_t>(k - 1)] * pa;
        pw_hi_[static_cast<std::size_t>(k)] = pw_hi_[static_cast<std::size_t>(k - 1)] * pb;
      }
      const double* rest = rest_.data() + i * nf;
      double acc_e = 0.0, acc_d = 0.0;
      for (std::size_t f = 0; f < nf; ++f) {
        if (d_[f] == 0.0) continue;
        const double core = rest[f] * pw_lo_[static_cast<std::size_t>(a_[f])] *
                            pw_hi_[static_cast<std::size_t>(b_[f])];
        acc_e += e_[f] * core;
        acc_d += d_[f] * core;
      }
      b1 += w * (acc_e - sp[i] * acc_d);
    }
    return b1;
  }

private:
  const TypeEngine* eng_;
  const JointModel* model_;
  int ell_;
  int max_pow_ = 0;
  std::vector<double> lo_cum_, hi_cum_, bw_;
  std::vector<double> d_, e_;
  std::vector<int> a_, b_;
  std::vector<double> rest_;
  mutable std::vector<double> fts_, cum_t_, pw_lo_, pw_hi_;
};

RootResult solve_b1_root(const JointModel& m, const B1Solver& b1, double lo, double hi,
                         double prev) {
  const Grid1D& gx = m.x_grid();
  const double clo = std::max(lo, gx.front());
  const double chi = std::min(hi, gx.back());
  if (!(clo < chi)) return {0.5 * (clo + chi), true};

  std::vector<double> xs;
  xs.push_back(clo);
  for (double p : gx.points)
    if (p > clo && p < chi) xs.push_back(p);
  xs.push_back(chi);

  std::vector<double> roots;
  double best_x = xs.front(), best_d = kInf;
  double d_prev = b1(xs.front());
  if (std::abs(d_prev) < best_d) {
    best_d = std::abs(d_prev);
    best_x = xs.front();
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double d_cur = b1(xs[i]);
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
        const double dm = b1(mid);
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

}  // namespace

VectorResult design_vector_iterative(const JointModel& m, int n, int T,
                                     const InitPolicy& init, double eps, int max_iter) {
  if (n < 1) throw InvalidArgument("design_vector_iterative: need n >= 1");
  if (T < 0) throw InvalidArgument("design_vector_iterative: need T >= 0");
  VectorResult res;
  res.design.n = n;
  if (T == 0) {
    res.design.types = enumerate_types(n, 1);
    res.design.type_prob = {1.0};
    res.design.recon_by_type = {m.s_mean()};
    res.design.mse = m.s_var();
    res.mse = res.design.mse;
    res.trace.converged = true;
    res.trace.stop_reason = StopReason::MseDelta;
    return res;
  }

  // Scalar design at the same T seeds the thresholds.
  const LloydResult scalar = lloyd_indirect(m, T, init, eps, max_iter);
  std::vector<double> t = scalar.q.thresholds;

  const int L = T + 1;
  TypeEngine eng(m, n, L);
  const Grid1D& gx = m.x_grid();

  std::vector<double> prob, shat;
  {
    SymbolChannel ch(m, t);
    eng.posteriors(ch, &prob, &shat);
    double mse0 = eng.mse(ch, shat);
    res.trace.steps.push_back({0, mse0, t, shat, false, false});
    res.mse = mse0;
  }

  double mse_prev = kInf;
  double mse = res.mse;
  int iter = 0;
  bool last_stalled = false;
  while (mse_prev - mse > eps && iter < max_iter) {
    mse_prev = mse;
    ++iter;
    {
      SymbolChannel ch(m, t);
      eng.posteriors(ch, &prob, &shat);
    }
    bool stalled = false, clamped = false;
    for (int ell = 1; ell <= T; ++ell) {
      SymbolChannel ch(m, t);
      B1Solver b1(eng, ch, t, shat, ell);
      const std::size_t li = static_cast<std::size_t>(ell - 1);
      const double lo = (li == 0) ? -kInf : t[li - 1];
      const double hi = (li + 1 < t.size()) ? t[li + 1] : kInf;
      const RootResult r = solve_b1_root(m, b1, lo, hi, t[li]);
      stalled = stalled || r.stalled;
      double nt = r.value;
      if (!(nt > lo) || !(nt < hi)) {
        const double a = std::max(lo, gx.front());
        const double b = std::min(hi, gx.back());
        nt = 0.5 * (a + b);
        clamped = true;
      }
      t[li] = nt;
    }
    {
      SymbolChannel ch(m, t);
      mse = eng.mse(ch, shat);
    }
    res.trace.steps.push_back({iter, mse, t, shat, stalled, clamped});
    last_stalled = stalled;
  }

  res.trace.iterations = iter;
  if (mse_prev - mse <= eps) {
    res.trace.converged = !last_stalled;
    res.trace.stop_reason =
        last_stalled ? StopReason::StalledRoot : StopReason::MseDelta;
  } else {
    res.trace.converged = false;
    res.trace.stop_reason = StopReason::MaxIter;
  }

  // Final reconstruction pass for a consistent reported design.
  SymbolChannel ch(m, t);
  eng.posteriors(ch, &prob, &shat);
  res.design.thresholds = t;
  res.design.types = eng.types();
  res.design.type_prob = prob;
  res.design.recon_by_type = shat;
  res.design.mse = eng.mse(ch, shat);
  res.mse = res.design.mse;
  return res;
}

}  // namespace iquant
