#include "optrates/dp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "optrates/exact.hpp"

namespace optrates {

namespace {

constexpr int kGoldenIterations = 48;

double grid_value(const RateGrid& grid, std::size_t i) { return grid.values[i]; }

// T(d, rho) together with the drift of the same best-of-lambda row.
struct Evaluation {
  double time = kInfiniteTime;
  double drift = 0.0;
};

Evaluation evaluate(const ProblemContext& ctx, Distribution dist, int d, double rho,
                    std::span<const double> t_star, Backend backend) {
  // RLS with k >= 2d cannot produce a strictly better offspring.
  if (dist == Distribution::Rls && rho >= 2.0 * d) return {};
  const TransitionRow best = best_row(ctx, dist, d, rho, backend);
  return {remaining_time(best, t_star), drift(best)};
}

double refine_minimum(const ProblemContext& ctx, Distribution dist, int d, double lo, double hi,
                      std::span<const double> t_star, Backend backend, double& best_rho,
                      double best_time) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo), b = std::log(hi);
  auto f = [&](double log_rho) {
    const double rho = std::exp(log_rho);
    if (!(rho > 0.0 && rho < 1.0)) return kInfiniteTime;
    return evaluate(ctx, dist, d, rho, t_star, backend).time;
  };
  double c = b - phi * (b - a), e = a + phi * (b - a);
  double fc = f(c), fe = f(e);
  for (int it = 0; it < kGoldenIterations; ++it) {
    if (fc < fe) {
      b = e, e = c, fe = fc;
      c = b - phi * (b - a), fc = f(c);
    } else {
      a = c, c = e, fc = fe;
      e = a + phi * (b - a), fe = f(e);
    }
  }
  const double cand_log = fc < fe ? c : e;
  const double cand_time = std::min(fc, fe);
  if (cand_time < best_time) {
    best_rho = std::exp(cand_log);
    return cand_time;
  }
  return best_time;
}

}  // namespace

std::string_view to_string(Criterion crit) { return crit == Criterion::Opt ? "opt" : "drift"; }

Criterion parse_criterion(std::string_view text) {
  if (text == "opt") return Criterion::Opt;
  if (text == "drift") return Criterion::Drift;
  throw std::invalid_argument("unknown criterion '" + std::string(text) +
                              "' (expected opt or drift)");
}

RateGrid RateGrid::standard(Distribution dist, int n) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  RateGrid grid{dist, {}};
  if (dist == Distribution::Rls) {
    grid.values.reserve(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) grid.values.push_back(k);
    return grid;
  }
  for (int i = 0; i <= 150; ++i) {
    const double p = std::exp2(i / 5.0 - 10.0) / n;
    if (p < 1.0) grid.values.push_back(p);
  }
  return grid;
}

std::uint64_t RateGrid::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      h ^= (word >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(dist));
  for (double v : values) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

TransitionRow best_row(const ProblemContext& ctx, Distribution dist, int d, double rho,
                       Backend backend) {
  if (backend == Backend::ExactRational) {
    exact::check_size(ctx.n);
    const exact::Row row = exact::transition_row(ctx.n, dist, d, rho);
    return exact::to_float(exact::best_of_lambda(row, ctx.lambda));
  }
  return best_of_lambda(transition_row(ctx, dist, d, rho), ctx.lambda);
}

double remaining_time(const TransitionRow& best, std::span<const double> lower_t_star) {
  const int d = best.parent_distance;
  if (d == 0) return 0.0;
  if (lower_t_star.size() < static_cast<std::size_t>(d))
    throw std::invalid_argument("lower policy does not cover all smaller distances");
  double escape = 0.0, weighted = 0.0;
  for (int v = 0; v < d; ++v) {
    const double pv = best.probs[static_cast<std::size_t>(v)];
    if (pv == 0.0) continue;
    escape += pv;
    if (v > 0) weighted += lower_t_star[static_cast<std::size_t>(v)] * pv;
  }
  if (escape < kEscapeFloor) return kInfiniteTime;
  return (1.0 + weighted) / escape;
}

double remaining_time(const ProblemContext& ctx, Distribution dist, int d, double rho,
                      const PolicyTable& lower) {
  ctx.validate();
  validate_rate(dist, ctx.n, rho);
  if (d < 0 || d > ctx.n) throw std::domain_error("distance outside [0, n]");
  if (d == 0) return 0.0;
  if (lower.t_star.size() < static_cast<std::size_t>(d))
    throw std::invalid_argument("lower policy does not cover all smaller distances");
  if (dist == Distribution::Rls && rho >= 2.0 * d) return kInfiniteTime;
  return remaining_time(best_row(ctx, dist, d, rho), lower.t_star);
}

PolicyBuild build_policy(const ProblemContext& ctx, Distribution dist, Criterion crit,
                         const RateGrid& grid, const BuildOptions& options) {
  ctx.validate();
  if (grid.dist != dist) throw std::invalid_argument("grid was built for another distribution");
  if (grid.values.empty()) throw std::invalid_argument("empty parameter grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    validate_rate(dist, ctx.n, grid.values[i]);
    if (i > 0 && !(grid.values[i] > grid.values[i - 1]))
      throw std::invalid_argument("parameter grid must be strictly increasing");
  }
  if (options.backend == Backend::ExactRational) exact::check_size(ctx.n);

  const int n = ctx.n;
  PolicyBuild build;
  build.grid = grid;
  auto& policy = build.policy;
  policy.ctx = ctx;
  policy.dist = dist;
  policy.crit = crit;
  policy.rho_star.assign(static_cast<std::size_t>(n) + 1, 0.0);
  policy.t_star.assign(static_cast<std::size_t>(n) + 1, 0.0);
  build.slices.reserve(static_cast<std::size_t>(n));

  for (int d = 1; d <= n; ++d) {
    const std::span<const double> lower(policy.t_star.data(), static_cast<std::size_t>(d));
    TimeSlice slice{d, std::vector<double>(grid.size(), kInfiniteTime)};
    std::size_t chosen = 0;
    double best_time = kInfiniteTime;
    double best_drift = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Evaluation ev = evaluate(ctx, dist, d, grid_value(grid, i), lower, options.backend);
      slice.t[i] = ev.time;
      if (crit == Criterion::Opt) {
        if (ev.time < best_time) best_time = ev.time, chosen = i;
      } else if (ev.drift > best_drift) {
        best_drift = ev.drift, chosen = i;
      }
    }
    double rho = grid_value(grid, chosen);
    double t = slice.t[chosen];
    if (options.refine_grid && crit == Criterion::Opt && dist != Distribution::Rls &&
        std::isfinite(t)) {
      const double lo = chosen > 0 ? grid_value(grid, chosen - 1) : grid_value(grid, 0) / 2.0;
      const double hi = chosen + 1 < grid.size() ? grid_value(grid, chosen + 1)
                                                 : (grid_value(grid, chosen) + 1.0) / 2.0;
      t = refine_minimum(ctx, dist, d, lo, hi, lower, options.backend, rho, t);
    }
    policy.rho_star[static_cast<std::size_t>(d)] = rho;
    policy.t_star[static_cast<std::size_t>(d)] = t;
    build.slices.push_back(std::move(slice));
  }
  return build;
}

double policy_diff(const PolicyTable& opt, const PolicyTable& drift) {
  if (opt.ctx.n != drift.ctx.n || opt.ctx.lambda != drift.ctx.lambda || opt.dist != drift.dist)
    throw std::invalid_argument("policy_diff needs tables for the same (n, lambda, distribution)");
  if (opt.t_star.size() != drift.t_star.size())
    throw std::invalid_argument("policy tables have different lengths");
  double worst = 0.0;
  for (std::size_t d = 0; d < opt.t_star.size(); ++d)
    worst = std::max(worst, drift.t_star[d] - opt.t_star[d]);
  return worst;
}

double expected_from_random_start(const PolicyTable& policy) {
  const std::vector<double> init = binomial_pmf(policy.n(), 0.5);
  if (policy.t_star.size() != init.size())
    throw std::invalid_argument("policy table does not cover d = 0..n");
  double sum = 0.0;
  for (std::size_t d = 0; d < init.size(); ++d)
    if (init[d] > 0.0) sum += init[d] * policy.t_star[d];
  return sum;
}

double expected_policy_diff(const PolicyTable& opt, const PolicyTable& drift) {
  policy_diff(opt, drift);  // same shape checks
  return expected_from_random_start(drift) - expected_from_random_start(opt);
}

double expected_strength(Distribution dist, double rho, int n) {
  switch (dist) {
    case Distribution::Rls: return rho;
    case Distribution::Sbm: return n * rho;
    case Distribution::Shift: return n * rho + std::exp(n * std::log1p(-rho));
  }
  throw std::logic_error("unreachable");
}

std::map<int, int> max_distance_per_k(const PolicyTable& policy) {
  if (policy.dist != Distribution::Rls)
    throw std::invalid_argument("max_distance_per_k needs an RLS policy");
  std::map<int, int> out;
  for (int d = 1; d < static_cast<int>(policy.rho_star.size()); ++d) {
    const int k = static_cast<int>(policy.rho_star[static_cast<std::size_t>(d)]);
    out[k] = d;  // d increases, so the last assignment is the maximum
  }
  return out;
}

}  // namespace optrates
