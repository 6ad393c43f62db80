#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace optrates {

/// Mutation-strength distribution of an elitist (1+lambda) algorithm on OneMax.
///   Rls   - flip exactly k distinct bits
///   Sbm   - standard bit mutation, k ~ Bin(n, p)
///   Shift - standard bit mutation with the k = 0 mass moved to k = 1
enum class Distribution { Rls, Sbm, Shift };

std::string_view to_string(Distribution dist);
Distribution parse_distribution(std::string_view text);

enum class Backend { Float64, ExactRational };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view text);

/// Largest problem size accepted by the exact rational backend.
inline constexpr int kExactMaxN = 64;

struct ProblemContext {
  int n = 1;
  std::int64_t lambda = 1;

  /// Throws std::invalid_argument unless n >= 1 and lambda >= 1.
  void validate() const;
};

/// Throws std::domain_error if rho is not a valid parameter for `dist`:
/// an integer in [1, n] for Rls, a probability strictly inside (0, 1) otherwise.
void validate_rate(Distribution dist, int n, double rho);

/// Distribution of the offspring distance d' in [0, d] for a parent at
/// distance d. Offspring that are worse than the parent are collapsed onto
/// d' = d, so probs[d] is the probability of not improving.
struct TransitionRow {
  int parent_distance = 0;
  std::vector<double> probs;

  /// Probability of strictly improving, summed over d' < d.
  double improvement() const;
  double stay() const { return probs.back(); }
};

/// ln C(n, k); 0 <= k <= n.
double log_choose(int n, int k);

/// Binomial pmf of Bin(m, p) over [0, m]. Entries that underflow are zero.
std::vector<double> binomial_pmf(int m, double p);

TransitionRow rls_row(const ProblemContext& ctx, int d, int k);
TransitionRow sbm_row(const ProblemContext& ctx, int d, double p);
TransitionRow shift_row(const ProblemContext& ctx, int d, double p);

/// Dispatches on `dist`; rho is k for Rls and p for the EA variants.
TransitionRow transition_row(const ProblemContext& ctx, Distribution dist, int d, double rho);

/// Distribution of the best of `lambda` independent offspring drawn from
/// `row`: result[d'] = S(d')^lambda - S(d'+1)^lambda with S the upper tail.
/// Evaluated in log space so that lambda up to 2^18 does not cancel.
TransitionRow best_of_lambda(const TransitionRow& row, std::int64_t lambda);

/// Expected distance decrease sum_{d' < d} (d - d') row[d'].
double drift(const TransitionRow& row);

/// Uncollapsed single-offspring law over the whole range [0, n]: probs[v]
/// is the probability that one offspring of a parent at distance d ends up
/// at distance v. Negligible tails (relative 1e-20 of the peak) are dropped,
/// which makes this suitable for sampling but not for exact golden values.
struct OffspringLaw {
  int parent_distance = 0;
  std::vector<double> probs;
};

OffspringLaw offspring_law(const ProblemContext& ctx, Distribution dist, int d, double rho);

}  // namespace optrates
