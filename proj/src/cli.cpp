#include "optrates/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "optrates/golden.hpp"
#include "optrates/io.hpp"
#include "optrates/regret.hpp"
#include "optrates/sim.hpp"

namespace optrates::cli {

namespace {

// Six significant digits for console summaries; files keep full precision.
std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

using nlohmann::json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ControllerSpec {
  std::string kind = "static";
  std::optional<std::string> rho, rho_min, rho_max, rho_init;
};

struct Settings {
  std::optional<int> n;
  std::string lambda = "1";
  std::string dist = "rls";
  std::string crit = "opt";
  std::string backend = "float";
  std::string out = ".";
  bool force = false;
  bool refine_grid = false;
  std::string config;
  // simulate
  std::optional<std::uint64_t> seed;
  std::uint64_t runs = 100;
  std::vector<std::string> controllers;
  std::vector<ControllerSpec> controller_specs;  // from the config file
  std::uint64_t traces = 0;
  bool overlay = false;
  std::string mode = "distance";
  // heatmap
  std::string modality;
  // verify-appendix
  bool verbose = false;
};

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string slug(std::string text) {
  for (char& c : text)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
  return text;
}

// "0.001", "1/n", "3/n", "1/n^2"
double parse_rate(const std::string& text, int n, const std::string& field) {
  auto fail = [&] { throw UsageError(field + ": cannot read rate '" + text + "'"); };
  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    try {
      return io::parse_double(text);
    } catch (const std::invalid_argument&) {
      fail();
    }
  }
  const std::string denom = text.substr(slash + 1);
  double num = 0.0;
  try {
    num = io::parse_double(text.substr(0, slash));
  } catch (const std::invalid_argument&) {
    fail();
  }
  if (denom == "n") return num / n;
  if (denom == "n^2" || denom == "n2") return num / (static_cast<double>(n) * n);
  fail();
  return 0.0;
}

// "two-rate:min=1/n^2:max=0.5" or "static:0.002"
ControllerSpec parse_controller(const std::string& text) {
  ControllerSpec spec;
  std::stringstream ss(text);
  std::string part;
  std::getline(ss, spec.kind, ':');
  while (std::getline(ss, part, ':')) {
    const auto eq = part.find('=');
    const std::string key = eq == std::string::npos ? "rho" : part.substr(0, eq);
    const std::string value = eq == std::string::npos ? part : part.substr(eq + 1);
    if (key == "rho") spec.rho = value;
    else if (key == "min") spec.rho_min = value;
    else if (key == "max") spec.rho_max = value;
    else if (key == "init") spec.rho_init = value;
    else throw UsageError("--controller: unknown key '" + key + "' in '" + text + "'");
  }
  if (spec.kind != "static" && spec.kind != "two-rate" && spec.kind != "oracle")
    throw UsageError("--controller: unknown kind '" + spec.kind +
                     "' (expected static, two-rate or oracle)");
  return spec;
}

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return io::format_double(v.get<double>());
  throw UsageError("config: expected a number or string, got " + v.dump());
}

ControllerSpec controller_from_json(const json& j) {
  ControllerSpec spec;
  if (j.is_string()) return parse_controller(j.get<std::string>());
  spec.kind = j.value("kind", std::string("static"));
  if (j.contains("rho")) spec.rho = json_scalar(j["rho"]);
  if (j.contains("rho_min")) spec.rho_min = json_scalar(j["rho_min"]);
  if (j.contains("rho_max")) spec.rho_max = json_scalar(j["rho_max"]);
  if (j.contains("rho_init")) spec.rho_init = json_scalar(j["rho_init"]);
  if (spec.kind != "static" && spec.kind != "two-rate" && spec.kind != "oracle")
    throw UsageError("config: unknown controller kind '" + spec.kind + "'");
  return spec;
}

// Values from the config file fill in whatever was not given as a flag.
void apply_config(Settings& s, const CLI::App& sub) {
  if (s.config.empty()) return;
  json j;
  {
    auto in = io::open_input(s.config);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw UsageError("--config: '" + s.config + "' is not valid JSON: " + e.what());
    }
  }
  if (!j.is_object()) throw UsageError("--config: top level must be an object");
  auto unset = [&](const char* flag) {
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    return opt != nullptr && opt->count() == 0;
  };
  try {
    if (j.contains("n") && unset("--n")) s.n = j["n"].get<int>();
    if (j.contains("lambda") && unset("--lambda")) {
      const json& l = j["lambda"];
      if (l.is_array()) {
        std::string joined;
        for (const auto& v : l) joined += (joined.empty() ? "" : ",") + json_scalar(v);
        s.lambda = joined;
      } else {
        s.lambda = json_scalar(l);
      }
    }
    if (j.contains("dist") && unset("--dist")) s.dist = j["dist"].get<std::string>();
    if (j.contains("crit") && unset("--crit")) s.crit = j["crit"].get<std::string>();
    if (j.contains("backend") && unset("--backend")) s.backend = j["backend"].get<std::string>();
    if (j.contains("out") && unset("--out")) s.out = j["out"].get<std::string>();
    if (j.contains("force") && unset("--force")) s.force = j["force"].get<bool>();
    if (j.contains("refine_grid") && unset("--refine-grid")) s.refine_grid = j["refine_grid"].get<bool>();
    if (j.contains("runs") && unset("--runs")) s.runs = j["runs"].get<std::uint64_t>();
    if (j.contains("seed") && unset("--seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("traces") && unset("--traces")) s.traces = j["traces"].get<std::uint64_t>();
    if (j.contains("mode") && unset("--mode")) s.mode = j["mode"].get<std::string>();
    if (unset("--controller")) {
      if (j.contains("controller")) s.controller_specs.push_back(controller_from_json(j["controller"]));
      if (j.contains("controllers"))
        for (const auto& c : j["controllers"]) s.controller_specs.push_back(controller_from_json(c));
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("--config: ") + e.what());
  }
}

struct Job {
  int n = 0;
  std::vector<std::int64_t> lambdas;
  Distribution dist = Distribution::Rls;
  Criterion crit = Criterion::Opt;
  Backend backend = Backend::Float64;
  std::filesystem::path out;
};

Job resolve(const Settings& s) {
  Job job;
  if (!s.n) throw UsageError("--n: required");
  if (*s.n < 1) throw UsageError("--n: must be at least 1");
  job.n = *s.n;
  try {
    job.lambdas = parse_lambda_list(s.lambda);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--lambda: ") + e.what());
  }
  try {
    job.dist = parse_distribution(s.dist);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--dist: ") + e.what());
  }
  try {
    job.crit = parse_criterion(s.crit);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--crit: ") + e.what());
  }
  try {
    job.backend = parse_backend(s.backend);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--backend: ") + e.what());
  }
  if (job.backend == Backend::ExactRational && job.n > kExactMaxN)
    throw UsageError("--backend: exact needs --n <= " + std::to_string(kExactMaxN));
  job.out = s.out;
  std::error_code ec;
  std::filesystem::create_directories(job.out, ec);
  if (ec) throw io::IoError("cannot create output directory '" + job.out.string() + "': " + ec.message());
  return job;
}

TableKey key_for(const Job& job, const Settings& s, std::int64_t lambda, Criterion crit) {
  return {{job.n, lambda}, job.dist, crit, job.backend, s.refine_grid};
}

PolicyBuild table_for(const Job& job, const Settings& s, std::int64_t lambda, Criterion crit,
                      std::ostream& out) {
  bool hit = false;
  PolicyBuild build = cached_policy(key_for(job, s, lambda, crit), job.out / "cache", s.force, &hit);
  if (hit) out << "lambda=" << lambda << ": reusing cached " << to_string(crit) << " table\n";
  return build;
}

std::string table_name(const char* what, const Job& job, Criterion crit, std::int64_t lambda) {
  return std::string(what) + "_" + std::string(to_string(job.dist)) + "_" +
         std::string(to_string(crit)) + "_" + std::to_string(job.n) + "_" + std::to_string(lambda) +
         ".csv";
}

int cmd_policy(const Settings& s, std::ostream& out) {
  const Job job = resolve(s);
  for (std::int64_t lambda : job.lambdas) {
    const PolicyBuild build = table_for(job, s, lambda, job.crit, out);
    const auto path = job.out / table_name("policy", job, job.crit, lambda);
    write_policy_csv(build.policy, path);
    write_slices_csv(build, job.out / table_name("slices", job, job.crit, lambda));
    out << "lambda=" << lambda << ": wrote " << path.string() << "; expected iterations from a random start "
        << brief(expected_from_random_start(build.policy)) << '\n';
    if (job.dist == Distribution::Rls) {
      const auto per_k = max_distance_per_k(build.policy);
      // Only small flip counts are interesting; near d = n every k shows up.
      constexpr int kShown = 16;
      out << "  k: max d";
      for (const auto& [k, d] : per_k)
        if (k <= kShown) out << "  " << k << ':' << d;
      out << '\n';
      std::string never;
      for (int k = 1; k <= std::min(kShown, per_k.rbegin()->first); ++k)
        if (!per_k.contains(k)) never += (never.empty() ? "" : ",") + std::to_string(k);
      if (!never.empty()) out << "  never chosen (k <= 16): " << never << '\n';
    }
  }
  return kOk;
}

int cmd_heatmap(const Settings& s, std::ostream& out) {
  const Job job = resolve(s);
  std::vector<int> probe;
  if (!s.modality.empty()) {
    std::stringstream ss(s.modality);
    std::string item;
    while (std::getline(ss, item, ',')) {
      int d = 0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), d);
      if (res.ec != std::errc() || res.ptr != item.data() + item.size() || d < 1 || d > job.n)
        throw UsageError("--modality: '" + item + "' is not a distance in [1, n]");
      probe.push_back(d);
    }
  }
  for (std::int64_t lambda : job.lambdas) {
    const PolicyBuild build = table_for(job, s, lambda, job.crit, out);
    const RegretGrid grid = build_grid(build);
    std::string stem = "heatmap_" + std::string(to_string(job.dist)) + "_" + std::to_string(job.n) +
                       "_" + std::to_string(lambda);
    if (job.crit == Criterion::Drift) stem += "_drift";
    export_heatmap(grid, job.out / (stem + ".csv"), job.out / (stem + ".pgm"));
    out << "lambda=" << lambda << ": wrote " << (job.out / (stem + ".csv")).string() << " and .pgm\n";
    for (int d : probe) {
      const ModalityReport rep = modality(build.slices[static_cast<std::size_t>(d - 1)], build.grid.values);
      out << "  d=" << d << (rep.is_unimodal ? " unimodal" : " multimodal") << ", minima at rho =";
      for (const auto& [rho, t] : rep.local_minima)
        out << ' ' << brief(rho) << " (T=" << brief(t) << ')';
      out << '\n';
    }
  }
  return kOk;
}

sim::Controller make_controller(const ControllerSpec& spec, const Job& job, std::int64_t lambda,
                                const Settings& s, std::ostream& out) {
  const bool ea = job.dist != Distribution::Rls;
  const std::string default_rate = ea ? "1/n" : "1";
  if (spec.kind == "static")
    return sim::StaticRate{parse_rate(spec.rho.value_or(default_rate), job.n, "static rate")};
  if (spec.kind == "two-rate") {
    if (lambda < 2) throw UsageError("--controller: two-rate needs every lambda >= 2 (got " +
                                     std::to_string(lambda) + ")");
    sim::TwoRate t;
    t.rho_min = parse_rate(spec.rho_min.value_or("1/n"), job.n, "two-rate min");
    t.rho_max = parse_rate(spec.rho_max.value_or("0.5"), job.n, "two-rate max");
    t.rho_init = parse_rate(spec.rho_init.value_or(spec.rho.value_or("1/n")), job.n, "two-rate init");
    t.rho_init = std::max(t.rho_init, t.rho_min);
    return t;
  }
  auto policy = std::make_shared<PolicyTable>(table_for(job, s, lambda, job.crit, out).policy);
  return sim::OraclePolicy{std::move(policy)};
}

int cmd_simulate(const Settings& s, std::ostream& out) {
  if (!s.seed) throw UsageError("--seed: required for simulate");
  if (s.runs < 1) throw UsageError("--runs: must be at least 1");
  const Job job = resolve(s);
  sim::SimOptions options;
  if (s.mode == "bits") options.mode = sim::SimMode::BitString;
  else if (s.mode != "distance") throw UsageError("--mode: expected distance or bits");

  std::vector<ControllerSpec> specs = s.controller_specs;
  for (const auto& text : s.controllers) specs.push_back(parse_controller(text));
  if (specs.empty()) specs.push_back(ControllerSpec{});

  // Validate every combination before spending time on any of them.
  for (std::int64_t lambda : job.lambdas)
    for (const auto& spec : specs)
      if (spec.kind != "oracle") {
        try {
          sim::validate(make_controller(spec, job, lambda, s, out), {job.n, lambda}, job.dist);
        } catch (const std::domain_error& e) {
          throw UsageError(std::string("--controller: ") + e.what());
        } catch (const UsageError&) {
          throw;
        } catch (const std::invalid_argument& e) {
          throw UsageError(std::string("--controller: ") + e.what());
        }
      }

  const std::string base = std::string(to_string(job.dist)) + "_" + std::to_string(job.n);
  const auto bench_path = job.out / ("bench_" + base + ".csv");
  auto bench_out = io::open_output(bench_path);
  bench_out << "lambda,controller,runs,mean,stderr\n";
  json meta = {{"command", "simulate"},
               {"n", job.n},
               {"lambda", job.lambdas},
               {"dist", to_string(job.dist)},
               {"runs", s.runs},
               {"seed", *s.seed},
               {"mode", s.mode},
               {"rng", sim::Rng::kDescription},
               {"controllers", json::array()}};

  for (std::int64_t lambda : job.lambdas) {
    const ProblemContext ctx{job.n, lambda};
    std::optional<RegretGrid> grid;
    for (const auto& spec : specs) {
      const sim::Controller ctrl = make_controller(spec, job, lambda, s, out);
      const std::string label = sim::describe(ctrl);
      const sim::BenchStats stats = sim::bench(ctx, job.dist, ctrl, s.runs, *s.seed, options);
      bench_out << lambda << ',' << label << ',' << stats.runs << ',' << io::format_double(stats.mean)
                << ',' << io::format_double(stats.std_error) << '\n';
      out << "lambda=" << lambda << ' ' << label << ": mean " << brief(stats.mean)
          << " stderr " << brief(stats.std_error) << " over " << stats.runs << " runs\n";
      if (lambda == job.lambdas.front()) meta["controllers"].push_back(label);
      for (std::uint64_t i = 0; i < std::min(s.traces, s.runs); ++i) {
        const sim::RunTrace trace = sim::run_once(ctx, job.dist, ctrl, *s.seed + i, options);
        const std::string stem = base + "_" + std::to_string(lambda) + "_" + slug(label) + "_" +
                                 std::to_string(*s.seed + i);
        sim::write_trace(trace, job.out / ("trace_" + stem + ".csv"));
        if (s.overlay) {
          if (!grid) grid.emplace(build_grid(table_for(job, s, lambda, Criterion::Opt, out)));
          sim::overlay_trace(trace, *grid, job.out / ("overlay_" + stem + ".csv"));
        }
      }
    }
  }
  if (!bench_out) throw io::IoError("failed writing '" + bench_path.string() + "'");
  auto meta_out = io::open_output(job.out / ("simulate_" + base + ".json"));
  meta_out << meta.dump(2) << '\n';
  return kOk;
}

int cmd_verify_appendix(const Settings& s, std::ostream& out) {
  const golden::Report report = golden::verify();
  golden::print_report(report, out, !s.verbose);
  return report.ok() ? kOk : kVerifyFailed;
}

void add_table_options(CLI::App& sub, Settings& s) {
  sub.add_option("--n", s.n, "problem size");
  sub.add_option("--lambda", s.lambda, "comma separated offspring population sizes")->capture_default_str();
  sub.add_option("--dist", s.dist, "rls, sbm or shift")->capture_default_str();
  sub.add_option("--crit", s.crit, "opt or drift")->capture_default_str();
  sub.add_option("--backend", s.backend, "float or exact (n <= 64)")->capture_default_str();
  sub.add_option("--out", s.out, "output directory")->capture_default_str();
  sub.add_flag("--force", s.force, "rebuild cached tables");
  sub.add_flag("--refine-grid", s.refine_grid, "golden-section refinement of EA optima");
  sub.add_option("--config", s.config, "JSON file with defaults; flags win");
}

}  // namespace

std::vector<std::int64_t> parse_lambda_list(std::string_view text) {
  std::vector<std::int64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    std::int64_t value = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size() || value < 1)
      throw std::invalid_argument("'" + std::string(item) + "' is not a positive integer");
    out.push_back(value);
    pos = comma + 1;
  }
  return out;
}

std::string cache_stem(const TableKey& key, const RateGrid& grid) {
  return std::string(to_string(key.dist)) + "_" + std::string(to_string(key.crit)) + "_" +
         std::to_string(key.ctx.n) + "_" + std::to_string(key.ctx.lambda) + "_" +
         std::string(to_string(key.backend)) + (key.refine_grid ? "_refined_" : "_") +
         hex(grid.fingerprint());
}

void write_policy_csv(const PolicyTable& policy, const std::filesystem::path& path) {
  auto out = io::open_output(path);
  out << "n,lambda,dist,crit,d,rho,t_star\n";
  for (int d = 1; d <= policy.n(); ++d) {
    const auto i = static_cast<std::size_t>(d);
    out << policy.n() << ',' << policy.ctx.lambda << ',' << to_string(policy.dist) << ','
        << to_string(policy.crit) << ',' << d << ',' << io::format_double(policy.rho_star[i]) << ','
        << io::format_double(policy.t_star[i]) << '\n';
  }
  if (!out) throw io::IoError("failed writing '" + path.string() + "'");
}

void write_slices_csv(const PolicyBuild& build, const std::filesystem::path& path) {
  auto out = io::open_output(path);
  out << "d,rho,t\n";
  for (const TimeSlice& slice : build.slices)
    for (std::size_t i = 0; i < slice.t.size(); ++i)
      out << slice.d << ',' << io::format_double(build.grid.values[i]) << ','
          << io::format_double(slice.t[i]) << '\n';
  if (!out) throw io::IoError("failed writing '" + path.string() + "'");
}

PolicyBuild read_tables(const TableKey& key, const std::filesystem::path& policy_path,
                        const std::filesystem::path& slices_path) {
  const int n = key.ctx.n;
  auto bad = [](const std::filesystem::path& p, const std::string& why) {
    return io::IoError("'" + p.string() + "': " + why);
  };
  PolicyBuild build;
  build.grid = RateGrid::standard(key.dist, n);
  PolicyTable& policy = build.policy;
  policy.ctx = key.ctx;
  policy.dist = key.dist;
  policy.crit = key.crit;
  policy.rho_star.assign(static_cast<std::size_t>(n) + 1, 0.0);
  policy.t_star.assign(static_cast<std::size_t>(n) + 1, 0.0);

  const auto rows = io::read_csv(policy_path, "n,lambda,dist,crit,d,rho,t_star");
  if (rows.size() != static_cast<std::size_t>(n)) throw bad(policy_path, "wrong number of rows");
  try {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& f = rows[r];
      if (f.size() != 7 || f[0] != std::to_string(n) || f[1] != std::to_string(key.ctx.lambda) ||
          f[2] != to_string(key.dist) || f[3] != to_string(key.crit) || f[4] != std::to_string(r + 1))
        throw bad(policy_path, "row " + std::to_string(r + 1) + " does not match the table key");
      policy.rho_star[r + 1] = io::parse_double(f[5]);
      policy.t_star[r + 1] = io::parse_double(f[6]);
    }
  } catch (const std::invalid_argument& e) {
    throw bad(policy_path, e.what());
  }

  const auto cells = io::read_csv(slices_path, "d,rho,t");
  const std::size_t width = build.grid.size();
  if (cells.size() != static_cast<std::size_t>(n) * width) throw bad(slices_path, "wrong number of rows");
  build.slices.reserve(static_cast<std::size_t>(n));
  try {
    for (int d = 1; d <= n; ++d) {
      TimeSlice slice{d, std::vector<double>(width)};
      for (std::size_t i = 0; i < width; ++i) {
        const auto& f = cells[static_cast<std::size_t>(d - 1) * width + i];
        if (f.size() != 3 || f[0] != std::to_string(d) || io::parse_double(f[1]) != build.grid.values[i])
          throw bad(slices_path, "row for d=" + std::to_string(d) + " does not match the grid");
        slice.t[i] = io::parse_double(f[2]);
      }
      build.slices.push_back(std::move(slice));
    }
  } catch (const std::invalid_argument& e) {
    throw bad(slices_path, e.what());
  }
  return build;
}

PolicyBuild cached_policy(const TableKey& key, const std::filesystem::path& cache_dir, bool force,
                          bool* hit) {
  const RateGrid grid = RateGrid::standard(key.dist, key.ctx.n);
  const std::string stem = cache_stem(key, grid);
  const auto policy_path = cache_dir / (stem + ".policy.csv");
  const auto slices_path = cache_dir / (stem + ".slices.csv");
  if (hit) *hit = false;
  if (!force && std::filesystem::exists(policy_path) && std::filesystem::exists(slices_path)) {
    try {
      PolicyBuild build = read_tables(key, policy_path, slices_path);
      if (hit) *hit = true;
      return build;
    } catch (const io::IoError&) {
      // stale or damaged cache entry: rebuild below
    }
  }
  BuildOptions options;
  options.backend = key.backend;
  options.refine_grid = key.refine_grid;
  PolicyBuild build = build_policy(key.ctx, key.dist, key.crit, grid, options);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (ec) throw io::IoError("cannot create cache directory '" + cache_dir.string() + "': " + ec.message());
  write_policy_csv(build.policy, policy_path);
  write_slices_csv(build, slices_path);
  return build;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal and drift-maximizing mutation rates for (1+lambda) algorithms on OneMax"};
  app.require_subcommand(1);
  Settings s;

  CLI::App* policy = app.add_subcommand("policy", "build policy tables and print their structure");
  add_table_options(*policy, s);

  CLI::App* heatmap = app.add_subcommand("heatmap", "export regret heatmaps (CSV and PGM)");
  add_table_options(*heatmap, s);
  heatmap->add_option("--modality", s.modality, "comma separated distances to report local minima for");

  CLI::App* simulate = app.add_subcommand("simulate", "benchmark parameter controllers by simulation");
  add_table_options(*simulate, s);
  simulate->add_option("--seed", s.seed, "base seed; run i uses seed + i");
  simulate->add_option("--runs", s.runs, "runs per lambda and controller")->capture_default_str();
  simulate->add_option("--controller", s.controllers,
                       "static[:RATE], two-rate[:min=R][:max=R][:init=R] or oracle; repeatable. "
                       "Rates accept 1/n and 1/n^2");
  simulate->add_option("--traces", s.traces, "write traces for the first N runs");
  simulate->add_flag("--overlay", s.overlay, "join traces with the regret grid");
  simulate->add_option("--mode", s.mode, "distance or bits")->capture_default_str();

  CLI::App* verify = app.add_subcommand("verify-appendix", "check the n=30, lambda=512 reference tables");
  verify->add_flag("--verbose", s.verbose, "print every cell");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kUsage;
    }
    CLI::App* sub = app.get_subcommands().front();
    apply_config(s, *sub);
    if (sub == policy) return cmd_policy(s, out);
    if (sub == heatmap) return cmd_heatmap(s, out);
    if (sub == simulate) return cmd_simulate(s, out);
    return cmd_verify_appendix(s, out);
  } catch (const io::IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace optrates::cli
