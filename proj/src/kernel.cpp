#include "optrates/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>

namespace optrates {

namespace {

// Unpruned pair summation is used whenever it costs at most this many
// products; small problems are therefore evaluated without any truncation.
constexpr long kExactPairBudget = 1L << 16;
// Improving (x, y) pairs below this fraction of the largest pair are dropped.
constexpr double kPairCutoff = 1e-20;

class LogFactorialTable {
 public:
  long double operator()(int k) {
    if (k < 0) throw std::domain_error("log factorial of a negative number");
    std::lock_guard lock(mutex_);
    if (static_cast<std::size_t>(k) >= table_.size()) {
      const std::size_t old = table_.size();
      table_.resize(std::max<std::size_t>(static_cast<std::size_t>(k) + 1, 2 * old + 64));
      for (std::size_t i = old; i < table_.size(); ++i)
        table_[i] = std::lgamma(static_cast<long double>(i) + 1.0L);
    }
    return table_[static_cast<std::size_t>(k)];
  }

 private:
  std::mutex mutex_;
  std::vector<long double> table_;
};

LogFactorialTable& log_factorials() {
  static LogFactorialTable table;
  return table;
}

long double log_choose_ld(int n, int k) {
  if (k < 0 || k > n) throw std::domain_error("log_choose outside 0 <= k <= n");
  auto& lf = log_factorials();
  return lf(n) - lf(k) - lf(n - k);
}

void check_distance(const ProblemContext& ctx, int d) {
  ctx.validate();
  if (d < 0 || d > ctx.n)
    throw std::domain_error("distance " + std::to_string(d) + " outside [0, " +
                            std::to_string(ctx.n) + "]");
}

// Hypergeometric weights h[b] = C(d, b) C(n - d, k - b) / C(n, k), i.e. the
// probability that exactly b of the k flipped bits were wrong ones, for b in
// [lo, hi]. Computed from the mode outwards with ratio recurrences.
struct Hypergeometric {
  int lo = 0;
  int hi = -1;
  std::vector<double> weights;
};

Hypergeometric hypergeometric(int n, int d, int k) {
  Hypergeometric h;
  h.lo = std::max(0, k - (n - d));
  h.hi = std::min(k, d);
  if (h.hi < h.lo) return h;
  h.weights.assign(static_cast<std::size_t>(h.hi - h.lo + 1), 0.0);
  const long long num = static_cast<long long>(k + 1) * (d + 1);
  int mode = static_cast<int>(num / (n + 2));
  mode = std::clamp(mode, h.lo, h.hi);
  const long double log_peak =
      log_choose_ld(d, mode) + log_choose_ld(n - d, k - mode) - log_choose_ld(n, k);
  auto at = [&](int b) -> double& { return h.weights[static_cast<std::size_t>(b - h.lo)]; };
  at(mode) = static_cast<double>(std::exp(log_peak));
  for (int b = mode; b < h.hi; ++b) {
    const double ratio = static_cast<double>(d - b) * (k - b) /
                         (static_cast<double>(b + 1) * (n - d - k + b + 1));
    at(b + 1) = at(b) * ratio;
  }
  for (int b = mode; b > h.lo; --b) {
    const double ratio = static_cast<double>(b) * (n - d - k + b) /
                         (static_cast<double>(d - b + 1) * (k - b + 1));
    at(b - 1) = at(b) * ratio;
  }
  return h;
}

// Fills probs[0..d] for standard bit mutation (or shift mutation). x counts
// flipped wrong bits, y flipped correct bits; the offspring distance is
// d - x + y.
void fill_ea_row(int n, int d, double p, bool shift, std::vector<double>& probs) {
  const int m = n - d;
  const std::vector<double> bx = binomial_pmf(d, p);
  const std::vector<double> by = binomial_pmf(m, p);

  // Improving pairs have x > y; y never exceeds min(m, d - 1).
  const int ytop = std::min(m, d - 1);
  int xlo = 1, xhi = d, ylo = 0, yhi = ytop;
  const long pairs = static_cast<long>(d) * (ytop + 1);
  if (pairs > kExactPairBudget) {
    double best_pair = 0.0, running_max = 0.0, max_x = 0.0, max_y = 0.0;
    for (int x = 1; x <= d; ++x) {
      if (x - 1 <= m) running_max = std::max(running_max, by[static_cast<std::size_t>(x - 1)]);
      best_pair = std::max(best_pair, bx[static_cast<std::size_t>(x)] * running_max);
      max_x = std::max(max_x, bx[static_cast<std::size_t>(x)]);
    }
    for (int y = 0; y <= ytop; ++y) max_y = std::max(max_y, by[static_cast<std::size_t>(y)]);
    const double threshold = kPairCutoff * best_pair;
    while (xlo <= xhi && bx[static_cast<std::size_t>(xlo)] * max_y < threshold) ++xlo;
    while (xhi >= xlo && bx[static_cast<std::size_t>(xhi)] * max_y < threshold) --xhi;
    while (ylo <= yhi && by[static_cast<std::size_t>(ylo)] * max_x < threshold) ++ylo;
    while (yhi >= ylo && by[static_cast<std::size_t>(yhi)] * max_x < threshold) --yhi;
  }
  for (int x = xlo; x <= xhi; ++x) {
    const double wx = bx[static_cast<std::size_t>(x)];
    if (wx == 0.0) continue;
    const int ymax = std::min(yhi, x - 1);
    for (int y = ylo; y <= ymax; ++y)
      probs[static_cast<std::size_t>(d - x + y)] += wx * by[static_cast<std::size_t>(y)];
  }

  // Non-improving mass, summed directly so that it keeps full relative
  // precision when the parent almost surely improves.
  std::vector<double> tail(static_cast<std::size_t>(m) + 2, 0.0);
  for (int y = m; y >= 0; --y)
    tail[static_cast<std::size_t>(y)] = tail[static_cast<std::size_t>(y) + 1] + by[static_cast<std::size_t>(y)];
  double stay = bx[0] * tail[std::min<std::size_t>(1, static_cast<std::size_t>(m) + 1)];
  for (int x = 1; x <= d; ++x)
    stay += bx[static_cast<std::size_t>(x)] * tail[static_cast<std::size_t>(std::min(x, m + 1))];
  const double zero_flips = bx[0] * by[0];
  if (shift) {
    const double hit = static_cast<double>(d) / n;
    probs[static_cast<std::size_t>(d - 1)] += zero_flips * hit;
    stay += zero_flips * (static_cast<double>(m) / n);
  } else {
    stay += zero_flips;
  }
  probs[static_cast<std::size_t>(d)] = std::min(stay, 1.0);
}

}  // namespace

std::string_view to_string(Distribution dist) {
  switch (dist) {
    case Distribution::Rls: return "rls";
    case Distribution::Sbm: return "sbm";
    case Distribution::Shift: return "shift";
  }
  return "?";
}

Distribution parse_distribution(std::string_view text) {
  if (text == "rls") return Distribution::Rls;
  if (text == "sbm") return Distribution::Sbm;
  if (text == "shift") return Distribution::Shift;
  throw std::invalid_argument("unknown distribution '" + std::string(text) +
                              "' (expected rls, sbm or shift)");
}

std::string_view to_string(Backend backend) {
  return backend == Backend::Float64 ? "float" : "exact";
}

Backend parse_backend(std::string_view text) {
  if (text == "float") return Backend::Float64;
  if (text == "exact") return Backend::ExactRational;
  throw std::invalid_argument("unknown backend '" + std::string(text) +
                              "' (expected float or exact)");
}

void ProblemContext::validate() const {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (lambda < 1) throw std::invalid_argument("lambda must be at least 1");
}

void validate_rate(Distribution dist, int n, double rho) {
  if (dist == Distribution::Rls) {
    if (!(rho >= 1.0 && rho <= n) || std::floor(rho) != rho)
      throw std::domain_error("RLS flip count " + std::to_string(rho) + " outside [1, " +
                              std::to_string(n) + "]");
  } else if (!(rho > 0.0 && rho < 1.0)) {
    throw std::domain_error("mutation probability " + std::to_string(rho) +
                            " outside (0, 1)");
  }
}

double TransitionRow::improvement() const {
  double sum = 0.0;
  for (int v = 0; v < parent_distance; ++v) sum += probs[static_cast<std::size_t>(v)];
  return sum;
}

double log_choose(int n, int k) { return static_cast<double>(log_choose_ld(n, k)); }

std::vector<double> binomial_pmf(int m, double p) {
  std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
  if (p <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p >= 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const int mode = std::min(m, static_cast<int>(std::floor((m + 1) * p)));
  const double odds = p / (1.0 - p);
  const long double lp = p;
  pmf[static_cast<std::size_t>(mode)] = static_cast<double>(
      std::exp(log_choose_ld(m, mode) + mode * std::log(lp) + (m - mode) * std::log1p(-lp)));
  for (int k = mode; k < m; ++k)
    pmf[static_cast<std::size_t>(k) + 1] =
        pmf[static_cast<std::size_t>(k)] * (static_cast<double>(m - k) / (k + 1)) * odds;
  for (int k = mode; k > 0; --k)
    pmf[static_cast<std::size_t>(k) - 1] =
        pmf[static_cast<std::size_t>(k)] * (static_cast<double>(k) / (m - k + 1)) / odds;
  return pmf;
}

TransitionRow rls_row(const ProblemContext& ctx, int d, int k) {
  check_distance(ctx, d);
  validate_rate(Distribution::Rls, ctx.n, k);
  TransitionRow row{d, std::vector<double>(static_cast<std::size_t>(d) + 1, 0.0)};
  if (d == 0) {
    row.probs[0] = 1.0;
    return row;
  }
  const Hypergeometric h = hypergeometric(ctx.n, d, k);
  double stay = 0.0;
  for (int b = h.lo; b <= h.hi; ++b) {
    const double w = h.weights[static_cast<std::size_t>(b - h.lo)];
    const int next = d + k - 2 * b;
    if (next < d)
      row.probs[static_cast<std::size_t>(next)] = w;
    else
      stay += w;
  }
  row.probs[static_cast<std::size_t>(d)] = std::min(stay, 1.0);
  return row;
}

TransitionRow sbm_row(const ProblemContext& ctx, int d, double p) {
  check_distance(ctx, d);
  validate_rate(Distribution::Sbm, ctx.n, p);
  TransitionRow row{d, std::vector<double>(static_cast<std::size_t>(d) + 1, 0.0)};
  if (d == 0) {
    row.probs[0] = 1.0;
    return row;
  }
  fill_ea_row(ctx.n, d, p, false, row.probs);
  return row;
}

TransitionRow shift_row(const ProblemContext& ctx, int d, double p) {
  check_distance(ctx, d);
  validate_rate(Distribution::Shift, ctx.n, p);
  TransitionRow row{d, std::vector<double>(static_cast<std::size_t>(d) + 1, 0.0)};
  if (d == 0) {
    row.probs[0] = 1.0;
    return row;
  }
  fill_ea_row(ctx.n, d, p, true, row.probs);
  return row;
}

TransitionRow transition_row(const ProblemContext& ctx, Distribution dist, int d, double rho) {
  switch (dist) {
    case Distribution::Rls:
      validate_rate(dist, ctx.n, rho);
      return rls_row(ctx, d, static_cast<int>(rho));
    case Distribution::Sbm: return sbm_row(ctx, d, rho);
    case Distribution::Shift: return shift_row(ctx, d, rho);
  }
  throw std::logic_error("unreachable");
}

TransitionRow best_of_lambda(const TransitionRow& row, std::int64_t lambda) {
  if (lambda < 1) throw std::invalid_argument("lambda must be at least 1");
  const int d = row.parent_distance;
  if (row.probs.size() != static_cast<std::size_t>(d) + 1)
    throw std::invalid_argument("transition row has the wrong length");
  if (lambda == 1) return row;

  const auto& r = row.probs;
  const double lam = static_cast<double>(lambda);
  // below[v] = P(offspring < v), above[v] = P(offspring >= v); both are sums
  // of non-negative terms, so whichever is small is accurate.
  std::vector<double> below(static_cast<std::size_t>(d) + 1, 0.0);
  std::vector<double> above(static_cast<std::size_t>(d) + 2, 0.0);
  for (int v = 0; v < d; ++v)
    below[static_cast<std::size_t>(v) + 1] = below[static_cast<std::size_t>(v)] + r[static_cast<std::size_t>(v)];
  for (int v = d; v >= 0; --v)
    above[static_cast<std::size_t>(v)] = above[static_cast<std::size_t>(v) + 1] + r[static_cast<std::size_t>(v)];
  auto log_above = [&](int v) {
    const double q = below[static_cast<std::size_t>(v)];
    return q < 0.5 ? std::log1p(-q) : std::log(above[static_cast<std::size_t>(v)]);
  };

  TransitionRow out{d, std::vector<double>(static_cast<std::size_t>(d) + 1, 0.0)};
  for (int v = 0; v < d; ++v) {
    const double here = r[static_cast<std::size_t>(v)];
    if (here <= 0.0) continue;
    const double tail_pow = std::exp(lam * log_above(v));
    if (tail_pow == 0.0) continue;
    const double share = here / above[static_cast<std::size_t>(v)];
    out.probs[static_cast<std::size_t>(v)] =
        share >= 1.0 ? tail_pow : -tail_pow * std::expm1(lam * std::log1p(-share));
  }
  out.probs[static_cast<std::size_t>(d)] =
      r[static_cast<std::size_t>(d)] <= 0.0 ? 0.0 : std::exp(lam * log_above(d));
  return out;
}

double drift(const TransitionRow& row) {
  double sum = 0.0;
  const int d = row.parent_distance;
  for (int v = 0; v < d; ++v) sum += (d - v) * row.probs[static_cast<std::size_t>(v)];
  return sum;
}

OffspringLaw offspring_law(const ProblemContext& ctx, Distribution dist, int d, double rho) {
  check_distance(ctx, d);
  validate_rate(dist, ctx.n, rho);
  const int n = ctx.n;
  OffspringLaw law{d, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0)};
  auto& out = law.probs;

  if (dist == Distribution::Rls) {
    const int k = static_cast<int>(rho);
    const Hypergeometric h = hypergeometric(n, d, k);
    for (int b = h.lo; b <= h.hi; ++b)
      out[static_cast<std::size_t>(d + k - 2 * b)] += h.weights[static_cast<std::size_t>(b - h.lo)];
    return law;
  }

  const int m = n - d;
  const std::vector<double> bx = binomial_pmf(d, rho);
  const std::vector<double> by = binomial_pmf(m, rho);
  const double peak_x = *std::max_element(bx.begin(), bx.end());
  const double peak_y = *std::max_element(by.begin(), by.end());
  const double threshold = kPairCutoff * peak_x * peak_y;
  int xlo = 0, xhi = d, ylo = 0, yhi = m;
  while (bx[static_cast<std::size_t>(xlo)] * peak_y < threshold) ++xlo;
  while (bx[static_cast<std::size_t>(xhi)] * peak_y < threshold) --xhi;
  while (by[static_cast<std::size_t>(ylo)] * peak_x < threshold) ++ylo;
  while (by[static_cast<std::size_t>(yhi)] * peak_x < threshold) --yhi;
  for (int x = xlo; x <= xhi; ++x)
    for (int y = ylo; y <= yhi; ++y)
      out[static_cast<std::size_t>(d - x + y)] += bx[static_cast<std::size_t>(x)] * by[static_cast<std::size_t>(y)];
  if (dist == Distribution::Shift) {
    const double zero_flips = bx[0] * by[0];
    out[static_cast<std::size_t>(d)] -= zero_flips;
    if (out[static_cast<std::size_t>(d)] < 0.0) out[static_cast<std::size_t>(d)] = 0.0;
    if (d > 0) out[static_cast<std::size_t>(d - 1)] += zero_flips * d / n;
    if (d < n) out[static_cast<std::size_t>(d + 1)] += zero_flips * (n - d) / n;
  }
  return law;
}

}  // namespace optrates
