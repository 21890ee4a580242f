#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/quantizer.hpp"

namespace iquant {

inline constexpr double kDefaultEps = 1e-10;
inline constexpr int kDefaultMaxIter = 500;

// Threshold initialization. The fixed point reached depends on it, so every
// policy is explicit and reproducible.
struct InitPolicy {
  enum class Kind { UniformQuantile, UniformInRange, Random, User };
  Kind kind = Kind::UniformQuantile;
  std::vector<double> user;  // Kind::User
  std::uint64_t seed = 0;    // Kind::Random

  static InitPolicy quantile() { return {}; }
  static InitPolicy in_range() { return {Kind::UniformInRange, {}, 0}; }
  static InitPolicy random(std::uint64_t seed) { return {Kind::Random, {}, seed}; }
  static InitPolicy user_list(std::vector<double> t) {
    return {Kind::User, std::move(t), 0};
  }
  // "uniform-quantile" | "uniform-in-range" | "random" | "list:v1,v2,..."
  static InitPolicy parse(const std::string& text, std::uint64_t seed);
  std::string name() const;
};

std::vector<double> initial_thresholds(const JointModel& m, int T, const InitPolicy& p);

enum class StopReason { MseDelta, MaxIter, StalledRoot };

struct IterSnapshot {
  int iter = 0;
  double mse = 0.0;
  std::vector<double> thresholds;
  std::vector<double> recon;
  bool stalled_root = false;
  bool clamped = false;
};

struct IterationTrace {
  std::vector<IterSnapshot> steps;
  bool converged = false;
  StopReason stop_reason = StopReason::MaxIter;
  int iterations = 0;
  // CSV: "# iquant-csv v1", header iter,mse,t_1..t_T, one row per iteration.
  std::string to_csv() const;
};

struct RootResult {
  double value = 0.0;
  bool stalled = false;  // no sign change found; value minimizes |g - target|
};

// Solves g(t) = target on (lo, hi): sign scan over the model grid nodes inside
// the bracket, then 60 bisection steps. With several roots, the one nearest
// `prev` wins (ties to the smaller); with none, the scanned point minimizing
// |g - target| is returned and flagged.
RootResult solve_threshold(const JointModel& m, double target, double lo, double hi,
                           double prev);

struct LloydResult {
  Quantizer q;
  double mse = 0.0;
  IterationTrace trace;
};

// Fixed-point iteration for threshold-constrained indirect scalar
// quantization: alternate full centroid passes with full threshold passes
// until the MSE improvement drops to eps.
LloydResult lloyd_indirect(const JointModel& m, int T, const InitPolicy& init,
                           double eps = kDefaultEps, int max_iter = kDefaultMaxIter);

}  // namespace iquant
