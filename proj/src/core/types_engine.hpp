#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/iterative.hpp"
#include "core/model.hpp"

namespace iquant {

// Per-sequence symbol products switch to log-space accumulation above this n.
inline constexpr int kLogSpaceN = 20;

// Occupancy counts of the L quantizer symbols across n observations.
struct TypeVector {
  std::vector<int> counts;
  int n = 0;
  std::uint64_t class_size = 0;  // exact multinomial for n <= 20, else 0
  double log_class_size = 0.0;   // always valid
  double class_size_value() const;
};

// All compositions of n into L nonnegative parts, ascending lexicographic
// order over the count tuples. Count equals binom(n+L-1, L-1).
std::vector<TypeVector> enumerate_types(int n, int L);

// P(symbol | S = s_i): conditional cell probabilities of one scalar quantizer
// applied to an observation drawn from f(x | s_i). Rows sum to one.
class SymbolChannel {
public:
  SymbolChannel(const JointModel& m, std::span<const double> thresholds);
  std::size_t levels() const { return levels_; }
  std::size_t s_nodes() const { return s_nodes_; }
  double prob(std::size_t si, std::size_t sym) const { return p_[si * levels_ + sym]; }
  std::span<const double> row(std::size_t si) const {
    return {p_.data() + si * levels_, levels_};
  }

private:
  std::size_t levels_ = 0, s_nodes_ = 0;
  std::vector<double> p_;
};

// Shared scalar quantizer applied to n conditionally i.i.d. observations;
// reconstruction values depend on the symbol type only.
struct VectorDesign {
  std::vector<double> thresholds;
  int n = 1;
  std::vector<TypeVector> types;
  std::vector<double> type_prob;       // per-sequence P(q(X) in Q)
  std::vector<double> recon_by_type;   // shat_Q
  double mse = 0.0;
  // CSV: one row per type with counts, class size, probability, shat.
  std::string type_table_csv() const;
};

// Type bookkeeping bound to (model, n, L): the type sets, the face-type
// lift indices, and the posterior/MSE/boundary integrals over the s grid.
class TypeEngine {
public:
  TypeEngine(const JointModel& m, int n, int L);

  const JointModel& model() const { return *model_; }
  int n() const { return n_; }
  int L() const { return L_; }
  const std::vector<TypeVector>& types() const { return types_; }
  const std::vector<TypeVector>& face_types() const { return face_types_; }
  // Index in types() of face_types()[f] with one occupancy added at symbol l.
  std::size_t lift_index(std::size_t f, std::size_t sym) const {
    return lift_[f * static_cast<std::size_t>(L_) + sym];
  }

  // Per-sequence posterior mass and conditional mean for every type.
  void posteriors(const SymbolChannel& ch, std::vector<double>* prob,
                  std::vector<double>* shat) const;
  // Sum over types of |T(Q)| * integral (s - shat_Q)^2 f_S P^n(Q|s) ds.
  double mse(const SymbolChannel& ch, std::span<const double> shat) const;
  // The threshold-stationarity functional at the current thresholds.
  double boundary_b1(const SymbolChannel& ch, std::span<const double> thresholds,
                     std::span<const double> shat, int ell) const;

private:
  friend class B1Solver;
  // P^n(Q|s_i) for every type of the given set, one s node at a time.
  void sequence_probs(const SymbolChannel& ch, const std::vector<TypeVector>& set,
                      std::size_t si, std::vector<double>* out) const;

  const JointModel* model_;
  int n_ = 1, L_ = 1;
  std::vector<TypeVector> types_, face_types_;
  std::vector<std::size_t> lift_;
  std::vector<double> bw_;  // s_w[i] * f_S(s_i)
};

// Spec-level single-type posterior: (per-sequence probability, shat).
std::pair<double, double> type_posterior(const JointModel& m, const SymbolChannel& ch,
                                         const TypeVector& Q);

// Spec-level boundary functional; recomputes the type posteriors internally.
double boundary_b1(const JointModel& m, const SymbolChannel& ch,
                   std::span<const double> thresholds, int n, int ell);

double evaluate_vector_mse(const JointModel& m, const VectorDesign& d);

struct VectorResult {
  VectorDesign design;
  IterationTrace trace;
  double mse = 0.0;
};

// Iterative design for n conditionally i.i.d. observations: full
// reconstruction pass over the types, then a sequential threshold pass
// solving B_1(t_l) = 0 on each bracket. Initialized from the scalar design.
VectorResult design_vector_iterative(const JointModel& m, int n, int T,
                                     const InitPolicy& init, double eps = kDefaultEps,
                                     int max_iter = kDefaultMaxIter);

}  // namespace iquant
