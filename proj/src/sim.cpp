#include "optrates/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>

#include "optrates/io.hpp"

namespace optrates::sim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int sample_strength(Distribution dist, int n, double rho, Rng& rng) {
  if (dist == Distribution::Rls) return static_cast<int>(rho);
  int k = std::binomial_distribution<int>(n, rho)(rng.engine());
  if (k == 0 && dist == Distribution::Shift) k = 1;
  return k;
}

// Initial string: n uniform bits, 1 marking a wrong position.
std::vector<std::uint8_t> initial_bits(int n, Rng& rng) {
  std::vector<std::uint8_t> wrong(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; i += 64) {
    const std::uint64_t word = rng.bits();
    for (int j = 0; j < 64 && i + j < n; ++j) wrong[static_cast<std::size_t>(i + j)] = (word >> j) & 1U;
  }
  return wrong;
}

int initial_distance(int n, Rng& rng) {
  int d = 0;
  for (int i = 0; i < n; i += 64) {
    std::uint64_t word = rng.bits();
    if (n - i < 64) word &= (std::uint64_t{1} << (n - i)) - 1;
    d += std::popcount(word);
  }
  return d;
}

double rate_for(const Controller& ctrl, int d) {
  return std::visit(Overloaded{
                        [](const StaticRate& s) { return s.rho; },
                        [](const TwoRate& t) { return std::clamp(t.rho_init, t.floor(), t.ceiling()); },
                        [d](const OraclePolicy& o) { return o.policy->rho_star[static_cast<std::size_t>(d)]; },
                    },
                    ctrl);
}

// Result of one iteration: best offspring distance and, for two-rate, its half.
struct Outcome {
  int best = 0;
  RateHalf half = RateHalf::Low;
  std::vector<int> flips;  // bit-string mode only
};

class BitString {
 public:
  BitString(std::vector<std::uint8_t> wrong, int d) : wrong_(std::move(wrong)), d_(d), mark_(wrong_.size(), 0) {}

  int distance() const { return d_; }

  // Distance of one offspring created with k flips; the positions land in `flips`.
  int offspring(int k, Rng& rng, std::vector<int>& flips) {
    const int n = static_cast<int>(wrong_.size());
    flips.clear();
    for (int j = n - k; j < n; ++j) {  // Floyd's sampling of k distinct positions
      const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(j) + 1));
      const int pick = mark_[static_cast<std::size_t>(t)] ? j : t;
      mark_[static_cast<std::size_t>(pick)] = 1;
      flips.push_back(pick);
    }
    int v = d_;
    for (int pos : flips) {
      mark_[static_cast<std::size_t>(pos)] = 0;
      v += wrong_[static_cast<std::size_t>(pos)] ? -1 : 1;
    }
    return v;
  }

  void apply(const std::vector<int>& flips, int v) {
    for (int pos : flips) wrong_[static_cast<std::size_t>(pos)] ^= 1U;
    d_ = v;
  }

 private:
  std::vector<std::uint8_t> wrong_;
  int d_;
  std::vector<std::uint8_t> mark_;
};

Outcome iterate_bits(BitString& x, Distribution dist, int n, std::int64_t lambda, double low,
                     double high, std::int64_t n_high, Rng& rng) {
  Outcome out;
  out.best = std::numeric_limits<int>::max();
  std::vector<int> flips;
  std::int64_t ties = 0;
  for (std::int64_t j = 0; j < lambda; ++j) {
    const bool is_high = j < n_high;
    const int k = sample_strength(dist, n, is_high ? high : low, rng);
    const int v = x.offspring(k, rng, flips);
    if (v < out.best) {
      out.best = v, ties = 1;
    } else if (v == out.best) {
      if (rng.below(static_cast<std::uint64_t>(++ties)) != 0) continue;
    } else {
      continue;
    }
    out.flips = flips;
    out.half = is_high ? RateHalf::High : RateHalf::Low;
  }
  return out;
}

Outcome iterate_distance(LawCache& cache, int d, std::int64_t lambda, double low, double high,
                         std::int64_t n_high, Rng& rng) {
  Outcome out;
  if (n_high == 0) {
    out.best = cache.sample_min(d, low, lambda, rng);
    return out;
  }
  const std::int64_t n_low = lambda - n_high;
  const int vh = cache.sample_min(d, high, n_high, rng);
  const int vl = cache.sample_min(d, low, n_low, rng);
  out.best = std::min(vh, vl);
  if (vh != vl) {
    out.half = vh < vl ? RateHalf::High : RateHalf::Low;
  } else {
    const std::int64_t ch = cache.count_at_min(d, high, n_high, vh, rng);
    const std::int64_t cl = cache.count_at_min(d, low, n_low, vl, rng);
    out.half = rng.below(static_cast<std::uint64_t>(ch + cl)) < static_cast<std::uint64_t>(ch)
                   ? RateHalf::High
                   : RateHalf::Low;
  }
  return out;
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
}

std::string describe(const Controller& ctrl) {
  return std::visit(
      Overloaded{
          [](const StaticRate& s) { return "static:" + io::format_double(s.rho); },
          [](const TwoRate& t) { return "two-rate:min=" + io::format_double(t.rho_min); },
          [](const OraclePolicy& o) {
            return "oracle:" + std::string(to_string(o.policy->crit));
          },
      },
      ctrl);
}

void validate(const Controller& ctrl, const ProblemContext& ctx, Distribution dist) {
  ctx.validate();
  std::visit(Overloaded{
                 [&](const StaticRate& s) { validate_rate(dist, ctx.n, s.rho); },
                 [&](const TwoRate& t) {
                   if (dist == Distribution::Rls)
                     throw std::invalid_argument("two-rate control needs an EA distribution");
                   if (ctx.lambda < 2) throw std::invalid_argument("two-rate control needs lambda >= 2");
                   if (!(t.rho_min > 0.0 && t.rho_min <= t.rho_init && t.rho_init <= t.rho_max &&
                         t.rho_max <= 0.5))
                     throw std::invalid_argument(
                         "two-rate bounds must satisfy 0 < rho_min <= rho_init <= rho_max <= 1/2");
                   if (t.floor() > t.ceiling())
                     throw std::invalid_argument("two-rate needs rho_min <= rho_max / 4");
                 },
                 [&](const OraclePolicy& o) {
                   if (!o.policy) throw std::invalid_argument("oracle controller without a policy");
                   const PolicyTable& p = *o.policy;
                   if (p.ctx.n != ctx.n || p.ctx.lambda != ctx.lambda || p.dist != dist)
                     throw std::invalid_argument("oracle policy was built for another (n, lambda, dist)");
                   for (int d = 1; d <= ctx.n; ++d)
                     validate_rate(dist, ctx.n, p.rho_star[static_cast<std::size_t>(d)]);
                 },
             },
             ctrl);
}

double two_rate_step(const TwoRate& cfg, double rate, RateHalf winner, const TwoRateDraw& draw) {
  const RateHalf half = draw.adopt ? winner : draw.fallback;
  const double next = half == RateHalf::High ? 2.0 * rate : rate / 2.0;
  return std::clamp(next, cfg.floor(), cfg.ceiling());
}

double two_rate_step(const TwoRate& cfg, double rate, RateHalf winner, Rng& rng) {
  const std::uint64_t r = rng.bits();
  TwoRateDraw draw{(r & 1U) == 0, (r & 2U) ? RateHalf::High : RateHalf::Low};
  return two_rate_step(cfg, rate, winner, draw);
}

LawCache::LawCache(const ProblemContext& ctx, Distribution dist) : ctx_(ctx), dist_(dist) {
  ctx_.validate();
}

const LawCache::Law& LawCache::law(int d, double rho) {
  const auto key = std::make_pair(d, rho);
  if (auto it = laws_.find(key); it != laws_.end()) return it->second;

  const OffspringLaw raw = offspring_law(ctx_, dist_, d, rho);
  Law law;
  const int n = ctx_.n;
  law.lo = 0;
  while (law.lo < n && raw.probs[static_cast<std::size_t>(law.lo)] == 0.0) ++law.lo;
  law.hi = n;
  while (law.hi > law.lo && raw.probs[static_cast<std::size_t>(law.hi)] == 0.0) --law.hi;
  const std::size_t width = static_cast<std::size_t>(law.hi - law.lo) + 1;
  law.prob.assign(raw.probs.begin() + law.lo, raw.probs.begin() + law.hi + 1);
  double total = 0.0;
  for (double p : law.prob) total += p;
  for (double& p : law.prob) p /= total;

  std::vector<double> above(width + 1, 0.0);
  for (std::size_t i = width; i-- > 0;) above[i] = above[i + 1] + law.prob[i];
  law.log_tail.assign(width + 1, 0.0);
  double below = 0.0;
  for (std::size_t i = 0; i <= width; ++i) {
    if (i == width)
      law.log_tail[i] = -std::numeric_limits<double>::infinity();
    else if (i > 0)
      law.log_tail[i] = below < 0.5 ? std::log1p(-below) : std::log(above[i]);
    if (i < width) below += law.prob[i];
  }
  return laws_.emplace(key, std::move(law)).first->second;
}

int LawCache::sample_min(int d, double rho, std::int64_t m, Rng& rng) {
  const Law& l = law(d, rho);
  // P(min > v) = S(v + 1)^m; take the smallest v with S(v + 1)^m <= 1 - U.
  const double target = std::log1p(-rng.uniform());
  const double lm = static_cast<double>(m);
  std::size_t lo = 0, hi = l.prob.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (lm * l.log_tail[mid + 1] <= target)
      hi = mid;
    else
      lo = mid + 1;
  }
  return l.lo + static_cast<int>(lo);
}

std::int64_t LawCache::count_at_min(int d, double rho, std::int64_t m, int v, Rng& rng) {
  const Law& l = law(d, rho);
  if (v < l.lo || v > l.hi) throw std::logic_error("minimum outside the offspring support");
  const std::size_t i = static_cast<std::size_t>(v - l.lo);
  const double r = std::min(1.0, l.prob[i] / std::exp(l.log_tail[i]));
  if (m == 1 || r >= 1.0) return m;
  // Position of the first offspring at v, conditioned on there being one,
  // then the remaining ones independently.
  const double log_q = std::log1p(-r);
  const double at_least_one = -std::expm1(static_cast<double>(m) * log_q);
  double j = std::ceil(std::log1p(-rng.uniform() * at_least_one) / log_q);
  j = std::clamp(j, 1.0, static_cast<double>(m));
  const auto rest = m - static_cast<std::int64_t>(j);
  if (rest == 0) return 1;
  return 1 + std::binomial_distribution<std::int64_t>(rest, r)(rng.engine());
}

RunTrace run_once(const ProblemContext& ctx, Distribution dist, const Controller& ctrl,
                  std::uint64_t seed, const SimOptions& options) {
  LawCache cache(ctx, dist);
  return run_once(ctx, dist, ctrl, seed, options, cache);
}

RunTrace run_once(const ProblemContext& ctx, Distribution dist, const Controller& ctrl,
                  std::uint64_t seed, const SimOptions& options, LawCache& cache) {
  validate(ctrl, ctx, dist);
  const int n = ctx.n;
  Rng rng(seed);
  RunTrace trace;
  trace.seed = seed;
  trace.ctx = ctx;
  trace.dist = dist;

  std::optional<BitString> bits;
  if (options.mode == SimMode::BitString) {
    auto wrong = initial_bits(n, rng);
    const int d0 = static_cast<int>(std::count(wrong.begin(), wrong.end(), 1));
    bits.emplace(std::move(wrong), d0);
    trace.initial_distance = d0;
  } else {
    trace.initial_distance = initial_distance(n, rng);
  }

  const TwoRate* two_rate = std::get_if<TwoRate>(&ctrl);
  const std::int64_t n_high = two_rate ? ctx.lambda / 2 : 0;
  double rate = two_rate ? rate_for(ctrl, 0) : 0.0;

  int d = trace.initial_distance;
  std::uint64_t it = 0;
  while (d > 0) {
    if (++it > options.iteration_cap)
      throw std::runtime_error("run with seed " + std::to_string(seed) + " exceeded " +
                               std::to_string(options.iteration_cap) + " iterations");
    const double rho = two_rate ? rate : rate_for(ctrl, d);
    const double low = two_rate ? rate / 2.0 : rho;
    const double high = two_rate ? 2.0 * rate : rho;
    Outcome out = bits ? iterate_bits(*bits, dist, n, ctx.lambda, low, high, n_high, rng)
                       : iterate_distance(cache, d, ctx.lambda, low, high, n_high, rng);
    if (two_rate) rate = two_rate_step(*two_rate, rate, out.half, rng);
    if (out.best <= d && bits) bits->apply(out.flips, out.best);
    if (out.best < d) {
      trace.steps.push_back({it, out.best, rho});
      d = out.best;
    }
  }
  trace.total_iterations = it;
  return trace;
}

BenchStats bench(const ProblemContext& ctx, Distribution dist, const Controller& ctrl,
                 std::uint64_t runs, std::uint64_t base_seed, const SimOptions& options) {
  if (runs < 1) throw std::invalid_argument("bench needs at least one run");
  validate(ctrl, ctx, dist);
  std::vector<std::uint64_t> totals(runs, 0);
  const std::uint64_t workers =
      std::clamp<std::uint64_t>(std::thread::hardware_concurrency(), 1, runs);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::uint64_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          LawCache cache(ctx, dist);
          for (std::uint64_t i = w; i < runs; i += workers)
            totals[i] = run_once(ctx, dist, ctrl, base_seed + i, options, cache).total_iterations;
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  long double sum = 0.0L;
  for (auto t : totals) sum += static_cast<long double>(t);
  const long double mean = sum / static_cast<long double>(runs);
  long double sq = 0.0L;
  for (auto t : totals) sq += (static_cast<long double>(t) - mean) * (static_cast<long double>(t) - mean);
  BenchStats stats;
  stats.runs = runs;
  stats.mean = static_cast<double>(mean);
  stats.std_error =
      runs > 1 ? static_cast<double>(std::sqrt(sq / static_cast<long double>(runs - 1) /
                                               static_cast<long double>(runs)))
               : 0.0;
  return stats;
}

void write_trace(const RunTrace& trace, const std::filesystem::path& path) {
  auto out = io::open_output(path);
  out << "iteration,d,rho\n";
  for (const TraceStep& s : trace.steps)
    out << s.iteration << ',' << s.d << ',' << io::format_double(s.rho) << '\n';
  if (!out) throw io::IoError("failed writing '" + path.string() + "'");
}

void overlay_trace(const RunTrace& trace, const RegretGrid& grid,
                   const std::filesystem::path& path) {
  if (trace.ctx.n != grid.n() || trace.ctx.lambda != grid.ctx().lambda || trace.dist != grid.dist())
    throw std::invalid_argument("trace and regret grid differ in (n, lambda, dist)");
  auto out = io::open_output(path);
  out << "iteration,d,rho,tau\n";
  int parent = trace.initial_distance;
  for (const TraceStep& s : trace.steps) {
    const double tau = grid.tau(parent, grid.nearest(s.rho));
    out << s.iteration << ',' << s.d << ',' << io::format_double(s.rho) << ','
        << io::format_double(tau) << '\n';
    parent = s.d;
  }
  if (!out) throw io::IoError("failed writing '" + path.string() + "'");
}

}  // namespace optrates::sim
