#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "optrates/kernel.hpp"

namespace optrates {

/// Sentinel for distances that cannot be left with a given parameter.
inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

/// Improvement probabilities below this are treated as "never leaves".
inline constexpr double kEscapeFloor = 1e-300;

enum class Criterion { Opt, Drift };

std::string_view to_string(Criterion crit);
Criterion parse_criterion(std::string_view text);

/// Ordered parameter grid. RLS uses every flip count 1..n; the EA variants
/// use p_i = 2^(i/5 - 10) / n for i in [0, 150], dropping points >= 1.
struct RateGrid {
  Distribution dist = Distribution::Rls;
  std::vector<double> values;

  static RateGrid standard(Distribution dist, int n);

  /// FNV-1a over the distribution and the bit patterns of the values.
  std::uint64_t fingerprint() const;
  std::size_t size() const { return values.size(); }
};

/// Per-distance parameter choice and expected remaining iterations. Both
/// vectors are indexed by distance 0..n; rho_star[0] is unused (0).
struct PolicyTable {
  ProblemContext ctx;
  Distribution dist = Distribution::Rls;
  Criterion crit = Criterion::Opt;
  std::vector<double> rho_star;
  std::vector<double> t_star;

  int n() const { return ctx.n; }
};

/// T(d, rho) for every grid parameter at one distance, aligned with the grid.
struct TimeSlice {
  int d = 0;
  std::vector<double> t;
};

struct BuildOptions {
  Backend backend = Backend::Float64;
  /// One golden-section pass between the neighbours of the best EA grid
  /// point (Opt criterion only). Off reproduces the plain grid tables.
  bool refine_grid = false;
};

struct PolicyBuild {
  PolicyTable policy;
  RateGrid grid;
  std::vector<TimeSlice> slices;  // slices[d - 1] for d in [1, n]
};

/// Best-of-lambda row for one (d, rho), using the requested backend.
TransitionRow best_row(const ProblemContext& ctx, Distribution dist, int d, double rho,
                       Backend backend = Backend::Float64);

/// (1 + sum_{d'=1}^{d-1} T*(d') P^lambda(d, d')) / (1 - P^lambda(d, d)) for
/// a precomputed best-of-lambda row. `lower_t_star` must cover d' < d.
double remaining_time(const TransitionRow& best, std::span<const double> lower_t_star);

/// Expected remaining iterations at distance d when rho is used at d and
/// `lower` is followed afterwards.
double remaining_time(const ProblemContext& ctx, Distribution dist, int d, double rho,
                      const PolicyTable& lower);

/// Dynamic program over d = 1..n. Opt picks the argmin of T(d, rho), Drift
/// the argmax of the best-of-lambda drift; ties go to the smaller rho.
PolicyBuild build_policy(const ProblemContext& ctx, Distribution dist, Criterion crit,
                         const RateGrid& grid, const BuildOptions& options = {});

/// max_d (T*_drift(d) - T*_opt(d)) over d in [0, n].
double policy_diff(const PolicyTable& opt, const PolicyTable& drift);

/// Expected total iterations from a uniformly random start: sum_d Bin(n, 1/2)(d) t_star(d).
double expected_from_random_start(const PolicyTable& policy);

/// Difference of the two expectations above (drift minus opt).
double expected_policy_diff(const PolicyTable& opt, const PolicyTable& drift);

/// Expected number of flipped bits: k, n p, or n p + (1 - p)^n.
double expected_strength(Distribution dist, double rho, int n);

/// For an RLS policy, k -> largest d whose optimal flip count is k.
std::map<int, int> max_distance_per_k(const PolicyTable& policy);

}  // namespace optrates
