#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "optrates/dp.hpp"
#include "optrates/regret.hpp"

namespace optrates::sim {

/// Per-run random source: std::mt19937_64 seeded through
/// std::seed_seq{low 32 bits, high 32 bits} of the run seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t bits() { return engine_(); }
  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  std::mt19937_64& engine() { return engine_; }

  static constexpr const char* kDescription =
      "mt19937_64 per run, seeded with seed_seq{lo32(seed), hi32(seed)}, seed = base_seed + run";

 private:
  std::mt19937_64 engine_;
};

struct StaticRate {
  double rho = 0.0;
};

/// Self-adjusting two-rate control. The controller rate r is kept in
/// [2 rho_min, rho_max / 2] so that the offspring rates r / 2 and 2 r stay
/// inside [rho_min, rho_max].
struct TwoRate {
  double rho_init = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.5;

  double floor() const { return 2.0 * rho_min; }
  double ceiling() const { return rho_max / 2.0; }
};

/// Follows rho_star(d) of a precomputed policy.
struct OraclePolicy {
  std::shared_ptr<const PolicyTable> policy;
};

using Controller = std::variant<StaticRate, TwoRate, OraclePolicy>;

/// Short label without commas, e.g. `static:0.001` or `two-rate:min=1e-06`.
std::string describe(const Controller& ctrl);

/// Throws std::invalid_argument for controllers that cannot drive (ctx, dist).
void validate(const Controller& ctrl, const ProblemContext& ctx, Distribution dist);

enum class RateHalf { Low, High };  // offspring created at r / 2 or at 2 r

struct TwoRateDraw {
  bool adopt = true;                  // take the winner's rate
  RateHalf fallback = RateHalf::Low;  // used when adopt is false
};

/// One controller update. With probability 1/2 the rate of the winning half
/// is adopted, otherwise r / 2 or 2 r is picked uniformly; then clamped.
double two_rate_step(const TwoRate& cfg, double rate, RateHalf winner, const TwoRateDraw& draw);
double two_rate_step(const TwoRate& cfg, double rate, RateHalf winner, Rng& rng);

enum class SimMode { Distance, BitString };

struct SimOptions {
  SimMode mode = SimMode::Distance;
  std::uint64_t iteration_cap = 1'000'000'000;
};

struct TraceStep {
  std::uint64_t iteration = 0;  // 1-based iteration that produced the improvement
  int d = 0;                    // new distance
  double rho = 0.0;             // parameter in effect during that iteration
};

struct RunTrace {
  std::uint64_t seed = 0;
  ProblemContext ctx;
  Distribution dist = Distribution::Rls;
  int initial_distance = 0;
  std::vector<TraceStep> steps;
  std::uint64_t total_iterations = 0;
};

struct BenchStats {
  std::uint64_t runs = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

/// Caches inverse-CDF tables of single-offspring laws per (d, rho). Not
/// thread safe; give each worker its own.
class LawCache {
 public:
  LawCache(const ProblemContext& ctx, Distribution dist);

  /// Distance of the best of m offspring drawn at rho from a parent at d.
  int sample_min(int d, double rho, std::int64_t m, Rng& rng);

  /// Number of offspring exactly at v among m, given that the minimum is v.
  std::int64_t count_at_min(int d, double rho, std::int64_t m, int v, Rng& rng);

 private:
  struct Law {
    int lo = 0;
    int hi = 0;
    std::vector<double> log_tail;  // ln P(offspring >= v) for v in [lo, hi + 1]
    std::vector<double> prob;      // P(offspring == v) for v in [lo, hi]
  };
  const Law& law(int d, double rho);

  ProblemContext ctx_;
  Distribution dist_;
  std::map<std::pair<int, double>, Law> laws_;
};

/// One run of the elitist (1+lambda) scheme from a uniform random string.
/// Throws std::runtime_error when the iteration cap is exceeded.
RunTrace run_once(const ProblemContext& ctx, Distribution dist, const Controller& ctrl,
                  std::uint64_t seed, const SimOptions& options = {});
RunTrace run_once(const ProblemContext& ctx, Distribution dist, const Controller& ctrl,
                  std::uint64_t seed, const SimOptions& options, LawCache& cache);

/// Runs seeds base_seed .. base_seed + runs - 1.
BenchStats bench(const ProblemContext& ctx, Distribution dist, const Controller& ctrl,
                 std::uint64_t runs, std::uint64_t base_seed, const SimOptions& options = {});

/// Writes `iteration,d,rho` for a trace.
void write_trace(const RunTrace& trace, const std::filesystem::path& path);

/// Writes `iteration,d,rho,tau`. tau is looked up at the distance the rate was
/// applied to (the previous distance) and the grid rho nearest to the trace rho.
/// Throws std::invalid_argument when (n, lambda, dist) differ.
void overlay_trace(const RunTrace& trace, const RegretGrid& grid,
                   const std::filesystem::path& path);

}  // namespace optrates::sim
