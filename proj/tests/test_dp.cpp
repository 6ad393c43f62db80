#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "optrates/dp.hpp"
#include "support/oracle.hpp"

using namespace optrates;

namespace {

constexpr Distribution kAll[] = {Distribution::Rls, Distribution::Sbm, Distribution::Shift};

bool close(double got, double want, double rel) {
  if (std::isinf(want)) return std::isinf(got);
  return std::abs(got - want) <= rel * std::abs(want);
}

PolicyTable zero_policy(ProblemContext ctx) {
  const auto len = static_cast<std::size_t>(ctx.n) + 1;
  return {ctx, Distribution::Rls, Criterion::Opt, std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
}

// Best-of-lambda RLS row out of Pascal's triangle; usable beyond n = 16.
std::vector<oracle::Real> pascal_best(int n, std::int64_t lambda, int d, int k) {
  return oracle::best_of(oracle::pascal_rls_row(n, d, k), lambda);
}

std::vector<oracle::Real> pascal_policy_times(int n, std::int64_t lambda, const std::vector<double>& rho) {
  return oracle::absorption_times(
      n, [&](int d) { return pascal_best(n, lambda, d, static_cast<int>(rho[static_cast<std::size_t>(d)])); });
}

}  // namespace

TEST_CASE("single improving outcome at d = 1") {
  for (int n : {2, 10, 1000})
    for (std::int64_t lambda : {1, 7, 64}) {
      const ProblemContext ctx{n, lambda};
      const double want = 1.0 / (1.0 - std::pow(1.0 - 1.0 / n, static_cast<double>(lambda)));
      CHECK(close(remaining_time(ctx, Distribution::Rls, 1, 1, zero_policy(ctx)), want, 1e-12));
    }
}

TEST_CASE("flipping at least 2d bits never improves") {
  const ProblemContext ctx{10, 4};
  const PolicyBuild build = build_policy(ctx, Distribution::Rls, Criterion::Opt, RateGrid::standard(Distribution::Rls, 10));
  for (int d = 1; d <= 5; ++d)
    for (int k = 2 * d; k <= 10; ++k) {
      CHECK(remaining_time(ctx, Distribution::Rls, d, k, build.policy) == kInfiniteTime);
      CHECK(build.slices[static_cast<std::size_t>(d) - 1].t[static_cast<std::size_t>(k) - 1] == kInfiniteTime);
    }
}

TEST_CASE("remaining_time rejects bad input") {
  const ProblemContext ctx{10, 2};
  CHECK_THROWS_AS(remaining_time(ctx, Distribution::Sbm, 3, 1.5, zero_policy(ctx)), std::domain_error);
  CHECK_THROWS_AS(remaining_time(ctx, Distribution::Rls, 3, 0, zero_policy(ctx)), std::domain_error);
  CHECK_THROWS_AS(remaining_time(ctx, Distribution::Rls, 11, 1, zero_policy(ctx)), std::domain_error);
}

TEST_CASE("n=6, lambda=2 policy matches the Markov chain") {
  const ProblemContext ctx{6, 2};
  const auto build = build_policy(ctx, Distribution::Rls, Criterion::Opt, RateGrid::standard(Distribution::Rls, 6));
  const auto want = oracle::policy_times(6, Distribution::Rls, 2, build.policy.rho_star);
  CHECK(build.policy.t_star[0] == 0.0);
  for (int d = 1; d <= 6; ++d)
    CHECK(close(build.policy.t_star[static_cast<std::size_t>(d)], static_cast<double>(want[static_cast<std::size_t>(d)]), 1e-12));
}

TEST_CASE("exhaustive stationary policies for n=5, lambda=1") {
  const int n = 5;
  const auto build = build_policy({n, 1}, Distribution::Rls, Criterion::Opt, RateGrid::standard(Distribution::Rls, n));
  std::vector<oracle::Real> best(n + 1, std::numeric_limits<oracle::Real>::infinity());
  std::vector<double> rho(n + 1, 0.0);
  int evaluated = 0;
  for (int code = 0; code < 3125; ++code) {
    int c = code;
    for (int d = 1; d <= n; ++d, c /= 5) rho[static_cast<std::size_t>(d)] = c % 5 + 1;
    const auto t = oracle::policy_times(n, Distribution::Rls, 1, rho);
    ++evaluated;
    for (int d = 1; d <= n; ++d) best[static_cast<std::size_t>(d)] = std::min(best[static_cast<std::size_t>(d)], t[static_cast<std::size_t>(d)]);
  }
  CHECK(evaluated == 3125);
  for (int d = 1; d <= n; ++d)
    CHECK(close(build.policy.t_star[static_cast<std::size_t>(d)], static_cast<double>(best[static_cast<std::size_t>(d)]), 1e-12));
}

TEST_CASE("tables match absorption times for all n <= 12") {
  for (Distribution dist : kAll)
    for (int n = 1; n <= 12; ++n)
      for (std::int64_t lambda : {1, 2, 8}) {
        CAPTURE(n);
        CAPTURE(lambda);
        const RateGrid grid = RateGrid::standard(dist, n);
        const auto build = build_policy({n, lambda}, dist, Criterion::Opt, grid);
        const auto& policy = build.policy;

        // rows[d][i]: best-of-lambda row at distance d for grid point i.
        std::vector<std::vector<std::vector<oracle::Real>>> rows(static_cast<std::size_t>(n) + 1);
        for (int d = 1; d <= n; ++d)
          for (double rho : grid.values)
            rows[static_cast<std::size_t>(d)].push_back(oracle::best_of(oracle::enumerate_row(n, dist, d, rho), lambda));
        std::vector<std::size_t> chosen(static_cast<std::size_t>(n) + 1, 0);
        for (int d = 1; d <= n; ++d) {
          const auto it = std::find(grid.values.begin(), grid.values.end(), policy.rho_star[static_cast<std::size_t>(d)]);
          REQUIRE(it != grid.values.end());
          chosen[static_cast<std::size_t>(d)] = static_cast<std::size_t>(it - grid.values.begin());
        }
        const auto t_opt = oracle::absorption_times(n, [&](int d) { return rows[static_cast<std::size_t>(d)][chosen[static_cast<std::size_t>(d)]]; });
        for (int d = 1; d <= n; ++d)
          CHECK(close(policy.t_star[static_cast<std::size_t>(d)], static_cast<double>(t_opt[static_cast<std::size_t>(d)]), 1e-10));

        // Each slice entry: use grid point i at d, the optimal choice elsewhere.
        for (int d = 1; d <= n; ++d)
          for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto t = oracle::absorption_times(n, [&](int e) {
              return rows[static_cast<std::size_t>(e)][e == d ? i : chosen[static_cast<std::size_t>(e)]];
            });
            CHECK(close(build.slices[static_cast<std::size_t>(d) - 1].t[i], static_cast<double>(t[static_cast<std::size_t>(d)]), 1e-10));
          }
      }
}

TEST_CASE("rational backend agrees with floating point") {
  for (Distribution dist : kAll) {
    const ProblemContext ctx{12, 8};
    const RateGrid grid = RateGrid::standard(dist, 12);
    const auto fl = build_policy(ctx, dist, Criterion::Opt, grid);
    const auto ex = build_policy(ctx, dist, Criterion::Opt, grid, {Backend::ExactRational, false});
    for (int d = 0; d <= 12; ++d) {
      CHECK(close(fl.policy.t_star[static_cast<std::size_t>(d)], ex.policy.t_star[static_cast<std::size_t>(d)], 1e-12));
      CHECK(fl.policy.rho_star[static_cast<std::size_t>(d)] == ex.policy.rho_star[static_cast<std::size_t>(d)]);
    }
  }
}

TEST_CASE("drift-maximizing flip counts at n=30, lambda=512") {
  const auto build = build_policy({30, 512}, Distribution::Rls, Criterion::Drift, RateGrid::standard(Distribution::Rls, 30));
  CHECK(build.policy.rho_star[7] == 5);
  CHECK(build.policy.rho_star[8] == 4);
  // t_star follows the drift choice at every level
  for (int d = 1; d <= 30; ++d)
    CHECK(close(build.policy.t_star[static_cast<std::size_t>(d)],
                remaining_time({30, 512}, Distribution::Rls, d, build.policy.rho_star[static_cast<std::size_t>(d)], build.policy),
                1e-12));
}

TEST_CASE("policy_diff") {
  const ProblemContext ctx{30, 512};
  const RateGrid grid = RateGrid::standard(Distribution::Rls, 30);
  const auto opt = build_policy(ctx, Distribution::Rls, Criterion::Opt, grid).policy;
  const auto drift = build_policy(ctx, Distribution::Rls, Criterion::Drift, grid).policy;
  CHECK(policy_diff(opt, opt) == 0.0);

  const auto t_opt = pascal_policy_times(30, 512, opt.rho_star);
  const auto t_drift = pascal_policy_times(30, 512, drift.rho_star);
  oracle::Real want = 0;
  for (int d = 1; d <= 30; ++d) want = std::max(want, t_drift[static_cast<std::size_t>(d)] - t_opt[static_cast<std::size_t>(d)]);
  const double got = policy_diff(opt, drift);
  CHECK(got >= 0.0);
  CHECK(std::abs(got - static_cast<double>(want)) <= 1e-9 * static_cast<double>(t_opt[30]));

  const auto other = build_policy({30, 256}, Distribution::Rls, Criterion::Opt, grid).policy;
  CHECK_THROWS_AS(policy_diff(other, drift), std::invalid_argument);
}

TEST_CASE("t_star grows with the distance up to n/2 and shrinks with lambda") {
  for (Distribution dist : kAll) {
    const int n = 60;
    const RateGrid grid = RateGrid::standard(dist, n);
    std::vector<double> prev;
    for (std::int64_t lambda = 1; lambda <= 1024; lambda *= 2) {
      const auto policy = build_policy({n, lambda}, dist, Criterion::Opt, grid).policy;
      CHECK(policy.t_star[0] == 0.0);
      // Past n/2 the complement is closer: flipping everything lands on n - d.
      for (int d = 1; d <= (n + 1) / 2; ++d)
        CHECK(policy.t_star[static_cast<std::size_t>(d)] > policy.t_star[static_cast<std::size_t>(d) - 1]);
      if (dist == Distribution::Rls)
        for (int d = n / 2 + 1; d <= n; ++d)
          CHECK(policy.t_star[static_cast<std::size_t>(d)] <= 1.0 + policy.t_star[static_cast<std::size_t>(n - d)] + 1e-9);
      if (!prev.empty())
        for (int d = 1; d <= n; ++d)
          CHECK(policy.t_star[static_cast<std::size_t>(d)] <= prev[static_cast<std::size_t>(d)] * (1 + 1e-12));
      prev = policy.t_star;
    }
  }
}

TEST_CASE("slices bound t_star from above with equality at the choice") {
  for (Distribution dist : kAll) {
    const int n = 50;
    const RateGrid grid = RateGrid::standard(dist, n);
    const auto build = build_policy({n, 16}, dist, Criterion::Opt, grid);
    for (int d = 1; d <= n; ++d) {
      const auto& slice = build.slices[static_cast<std::size_t>(d) - 1];
      CHECK(slice.d == d);
      const double t = build.policy.t_star[static_cast<std::size_t>(d)];
      for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(slice.t[i] >= t);
        if (grid.values[i] == build.policy.rho_star[static_cast<std::size_t>(d)]) CHECK(slice.t[i] == t);
      }
    }
  }
}

TEST_CASE("standard grids") {
  const auto rls = RateGrid::standard(Distribution::Rls, 7);
  CHECK(rls.values == std::vector<double>{1, 2, 3, 4, 5, 6, 7});
  const auto ea = RateGrid::standard(Distribution::Sbm, 1000);
  CHECK(ea.values.front() == std::exp2(-10.0) / 1000);
  CHECK(ea.size() == 100);  // 2^(i/5 - 10) / 1000 < 1 for i < 100
  for (std::size_t i = 1; i < ea.size(); ++i) CHECK(ea.values[i] > ea.values[i - 1]);
  CHECK(ea.values.back() < 1.0);
  CHECK(RateGrid::standard(Distribution::Shift, 1 << 21).size() == 151);
  CHECK(RateGrid::standard(Distribution::Sbm, 30).fingerprint() != RateGrid::standard(Distribution::Shift, 30).fingerprint());
  CHECK_THROWS_AS(build_policy({30, 1}, Distribution::Sbm, Criterion::Opt, rls), std::invalid_argument);
}

TEST_CASE("refinement never does worse than the grid") {
  const ProblemContext ctx{40, 4};
  for (Distribution dist : {Distribution::Sbm, Distribution::Shift}) {
    const RateGrid grid = RateGrid::standard(dist, 40);
    const auto plain = build_policy(ctx, dist, Criterion::Opt, grid);
    const auto refined = build_policy(ctx, dist, Criterion::Opt, grid, {Backend::Float64, true});
    for (int d = 1; d <= 40; ++d) {
      CHECK(refined.policy.t_star[static_cast<std::size_t>(d)] <= plain.policy.t_star[static_cast<std::size_t>(d)] * (1 + 1e-12));
      const double rho = refined.policy.rho_star[static_cast<std::size_t>(d)];
      CHECK((rho > 0.0 && rho < 1.0));
    }
  }
}

TEST_CASE("expected_strength") {
  CHECK(expected_strength(Distribution::Rls, 5, 100) == 5.0);
  CHECK(expected_strength(Distribution::Sbm, 1.0 / 1000, 1000) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(expected_strength(Distribution::Shift, 1e-12, 1000) == doctest::Approx(1.0).epsilon(1e-8));
  const double p = 0.01;
  CHECK(expected_strength(Distribution::Shift, p, 1000) == doctest::Approx(1000 * p + std::pow(1 - p, 1000)).epsilon(1e-14));
}

TEST_CASE("max_distance_per_k") {
  const int n = 30;
  PolicyTable constant = zero_policy({n, 1});
  std::fill(constant.rho_star.begin() + 1, constant.rho_star.end(), 1.0);
  CHECK(max_distance_per_k(constant) == std::map<int, int>{{1, n}});
  constant.dist = Distribution::Sbm;
  CHECK_THROWS_AS(max_distance_per_k(constant), std::invalid_argument);

  // argmin recomputed with Pascal rows and linear solves
  const std::int64_t lambda = 512;
  const auto policy = build_policy({n, lambda}, Distribution::Rls, Criterion::Opt, RateGrid::standard(Distribution::Rls, n)).policy;
  const auto t_opt = pascal_policy_times(n, lambda, policy.rho_star);
  std::map<int, int> want;
  for (int d = 1; d <= n; ++d) {
    std::vector<oracle::Real> t(static_cast<std::size_t>(n) + 1, std::numeric_limits<oracle::Real>::infinity());
    for (int k = 1; k <= n; ++k) {
      const auto row = pascal_best(n, lambda, d, k);
      oracle::Real escape = 0, acc = 1;
      for (int v = 0; v < d; ++v) escape += row[static_cast<std::size_t>(v)], acc += row[static_cast<std::size_t>(v)] * t_opt[static_cast<std::size_t>(v)];
      if (escape > 0) t[static_cast<std::size_t>(k)] = acc / escape;
    }
    const auto lo = *std::min_element(t.begin() + 1, t.end());
    int k = 1;
    while (t[static_cast<std::size_t>(k)] > lo * (1 + 1e-12L)) ++k;
    want[k] = d;
  }
  CHECK(max_distance_per_k(policy) == want);
}

TEST_CASE("random-start expectation") {
  const auto p1 = build_policy({1, 1}, Distribution::Rls, Criterion::Opt, RateGrid::standard(Distribution::Rls, 1)).policy;
  CHECK(p1.t_star[1] == doctest::Approx(1.0));
  CHECK(expected_from_random_start(p1) == doctest::Approx(0.5));
  const ProblemContext ctx{30, 4};
  const RateGrid grid = RateGrid::standard(Distribution::Rls, 30);
  const auto opt = build_policy(ctx, Distribution::Rls, Criterion::Opt, grid).policy;
  const auto drift = build_policy(ctx, Distribution::Rls, Criterion::Drift, grid).policy;
  CHECK(expected_policy_diff(opt, drift) >= 0.0);
  CHECK(expected_policy_diff(opt, drift) <= policy_diff(opt, drift));
}
