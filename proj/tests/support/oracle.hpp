#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the kernel or dp modules.

#include <cstdint>
#include <functional>
#include <vector>

#include "optrates/kernel.hpp"

namespace oracle {

using Real = long double;

/// Collapsed single-offspring row over d' in [0, d] by enumerating all 2^n
/// flip masks with their probabilities. n <= 16.
std::vector<Real> enumerate_row(int n, optrates::Distribution dist, int d, double rho);

/// Uncollapsed law over [0, n], same enumeration.
std::vector<Real> enumerate_law(int n, optrates::Distribution dist, int d, double rho);

/// RLS row from binomial coefficients out of Pascal's triangle.
std::vector<Real> pascal_rls_row(int n, int d, int k);

/// Best of lambda through S^lambda - S'^lambda, with the difference
/// factored out for lambda <= 4096.
std::vector<Real> best_of(const std::vector<Real>& row, std::int64_t lambda);

/// Best of lambda by summing the product measure over all lambda-tuples.
std::vector<Real> best_of_bruteforce(const std::vector<Real>& row, int lambda);

/// Expected hitting time of 0 for the chain whose state d >= 1 moves with
/// row_at(d) (length d + 1), assumed stochastic. Solves (I - Q) t = 1 with a
/// full-pivoting LU.
/// Entries reachable from a state with no way down are infinite.
std::vector<Real> absorption_times(int n, const std::function<std::vector<Real>(int)>& row_at);

/// Stationary-policy absorption times with enumerated rows (n <= 16).
std::vector<Real> policy_times(int n, optrates::Distribution dist, std::int64_t lambda,
                               const std::vector<double>& rho);

}  // namespace oracle
