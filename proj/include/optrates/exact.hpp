#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "optrates/kernel.hpp"

namespace optrates::exact {

/// Rational counterpart of TransitionRow. Rows sum to exactly one.
struct Row {
  int parent_distance = 0;
  std::vector<mpq_class> probs;
};

/// Exact value of a double (every finite double is a dyadic rational).
mpq_class from_double(double value);

/// Throws std::domain_error when n exceeds kExactMaxN.
void check_size(int n);

Row rls_row(int n, int d, int k);

/// Mixture over flip counts: sum_k Bin(n, p)(k) * rls_row(d, k), with the
/// zero-flip term acting as the identity row.
Row sbm_row(int n, int d, const mpq_class& p);

/// As sbm_row, but the zero-flip weight is moved to exactly one flip.
Row shift_row(int n, int d, const mpq_class& p);

Row transition_row(int n, Distribution dist, int d, double rho);

Row best_of_lambda(const Row& row, std::int64_t lambda);

mpq_class drift(const Row& row);

/// Rounds every entry to the nearest-below double.
TransitionRow to_float(const Row& row);

}  // namespace optrates::exact
