#include "optrates/exact.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace optrates::exact {

namespace {

mpz_class choose(int n, int k) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return out;
}

mpq_class power(const mpq_class& base, std::int64_t exponent) {
  // base is canonical, so numerator and denominator powers stay coprime.
  mpq_class out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(exponent));
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(exponent));
  return out;
}

void check_args(int n, int d) {
  check_size(n);
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (d < 0 || d > n) throw std::domain_error("distance outside [0, n]");
}

// Raw distribution over every offspring distance in [0, n] for exactly k flips.
std::vector<mpq_class> raw_flip_law(int n, int d, int k) {
  std::vector<mpq_class> law(static_cast<std::size_t>(n) + 1);
  const mpz_class total = choose(n, k);
  for (int b = std::max(0, k - (n - d)); b <= std::min(k, d); ++b) {
    mpq_class w(choose(d, b) * choose(n - d, k - b), total);
    w.canonicalize();
    law[static_cast<std::size_t>(d + k - 2 * b)] += w;
  }
  return law;
}

Row collapse(int d, const std::vector<mpq_class>& law) {
  Row row{d, std::vector<mpq_class>(static_cast<std::size_t>(d) + 1)};
  mpq_class improving = 0;
  for (int v = 0; v < d; ++v) {
    row.probs[static_cast<std::size_t>(v)] = law[static_cast<std::size_t>(v)];
    improving += law[static_cast<std::size_t>(v)];
  }
  row.probs[static_cast<std::size_t>(d)] = 1 - improving;
  return row;
}

Row ea_row(int n, int d, const mpq_class& p, bool shift) {
  check_args(n, d);
  if (p <= 0 || p >= 1) throw std::domain_error("mutation probability outside (0, 1)");
  std::vector<mpq_class> law(static_cast<std::size_t>(n) + 1);
  const mpq_class q = 1 - p;
  for (int k = 0; k <= n; ++k) {
    mpq_class weight = mpq_class(choose(n, k)) * power(p, k) * power(q, n - k);
    if (k == 0) {
      if (shift) {
        const auto one = raw_flip_law(n, d, 1);
        for (int v = 0; v <= n; ++v) law[static_cast<std::size_t>(v)] += weight * one[static_cast<std::size_t>(v)];
      } else {
        law[static_cast<std::size_t>(d)] += weight;
      }
      continue;
    }
    const auto flips = raw_flip_law(n, d, k);
    for (int v = 0; v <= n; ++v)
      if (flips[static_cast<std::size_t>(v)] != 0) law[static_cast<std::size_t>(v)] += weight * flips[static_cast<std::size_t>(v)];
  }
  return collapse(d, law);
}

}  // namespace

mpq_class from_double(double value) {
  if (!std::isfinite(value)) throw std::domain_error("cannot convert a non-finite double");
  mpq_class out(value);  // mpq_set_d is exact
  return out;
}

void check_size(int n) {
  if (n > kExactMaxN)
    throw std::domain_error("exact backend supports n <= " + std::to_string(kExactMaxN) +
                            " (got " + std::to_string(n) + ")");
}

Row rls_row(int n, int d, int k) {
  check_args(n, d);
  if (k < 1 || k > n) throw std::domain_error("flip count outside [1, n]");
  return collapse(d, raw_flip_law(n, d, k));
}

Row sbm_row(int n, int d, const mpq_class& p) { return ea_row(n, d, p, false); }

Row shift_row(int n, int d, const mpq_class& p) { return ea_row(n, d, p, true); }

Row transition_row(int n, Distribution dist, int d, double rho) {
  validate_rate(dist, n, rho);
  switch (dist) {
    case Distribution::Rls: return rls_row(n, d, static_cast<int>(rho));
    case Distribution::Sbm: return sbm_row(n, d, from_double(rho));
    case Distribution::Shift: return shift_row(n, d, from_double(rho));
  }
  throw std::logic_error("unreachable");
}

Row best_of_lambda(const Row& row, std::int64_t lambda) {
  if (lambda < 1) throw std::invalid_argument("lambda must be at least 1");
  const int d = row.parent_distance;
  Row out{d, std::vector<mpq_class>(static_cast<std::size_t>(d) + 1)};
  mpq_class above = row.probs[static_cast<std::size_t>(d)];
  mpq_class above_pow = power(above, lambda);
  out.probs[static_cast<std::size_t>(d)] = above_pow;
  for (int v = d - 1; v >= 0; --v) {
    if (row.probs[static_cast<std::size_t>(v)] == 0) continue;
    above += row.probs[static_cast<std::size_t>(v)];
    mpq_class next_pow = power(above, lambda);
    out.probs[static_cast<std::size_t>(v)] = next_pow - above_pow;
    above_pow = std::move(next_pow);
  }
  return out;
}

mpq_class drift(const Row& row) {
  mpq_class sum = 0;
  const int d = row.parent_distance;
  for (int v = 0; v < d; ++v) sum += (d - v) * row.probs[static_cast<std::size_t>(v)];
  return sum;
}

TransitionRow to_float(const Row& row) {
  TransitionRow out{row.parent_distance, std::vector<double>(row.probs.size(), 0.0)};
  for (std::size_t i = 0; i < row.probs.size(); ++i) out.probs[i] = row.probs[i].get_d();
  return out;
}

}  // namespace optrates::exact
