#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "optrates/exact.hpp"

namespace optrates::golden {

/// Reference setting of the published tables: RLS, n = 30, lambda = 512,
/// d in {7, 8}, k in [1, 10].
inline constexpr int kN = 30;
inline constexpr std::int64_t kLambda = 512;
inline constexpr int kMaxRho = 10;

struct CellResult {
  std::string table;  // single, best or drift
  int d = 0;
  int dprime = -1;    // -1 for drift cells
  int rho = 0;
  std::string printed;
  std::string computed;
  bool pass = false;
  std::string note;
};

struct Report {
  std::vector<CellResult> cells;

  std::size_t failures() const;
  bool ok() const { return failures() == 0; }
};

struct VerifyOptions {
  /// Called on every exact single-offspring row before it is used; lets
  /// tests inject faults.
  std::function<void(int d, int rho, exact::Row& row)> fault;
};

/// Recomputes every cell with rational arithmetic. Fractions must match
/// exactly, scientific values (and the complements of the `1-x` cells) after
/// rounding to 3 significant figures, drifts after rounding to 4 decimals.
Report verify(const VerifyOptions& options = {});

/// Rounds a positive rational to 3 significant figures: returns the
/// mantissa in [100, 999] and the exponent e of its leading digit.
std::pair<long, int> round_sig3(const mpq_class& value);

/// Round-half-up of value * 10^4.
long round_4dp(const mpq_class& value);

void print_report(const Report& report, std::ostream& out, bool failures_only = false);

}  // namespace optrates::golden
