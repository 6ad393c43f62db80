#pragma once

#include <filesystem>
#include <ostream>
#include <string_view>
#include <vector>

#include "optrates/dp.hpp"

namespace optrates::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kVerifyFailed = 2, kIoFailure = 3 };

/// Entry point behind the `optrates` executable. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "1,2,64" -> {1, 2, 64}; throws std::invalid_argument on empty or
/// non-positive entries.
std::vector<std::int64_t> parse_lambda_list(std::string_view text);

/// Everything that determines a table, used as the cache key.
struct TableKey {
  ProblemContext ctx;
  Distribution dist = Distribution::Rls;
  Criterion crit = Criterion::Opt;
  Backend backend = Backend::Float64;
  bool refine_grid = false;
};

std::string cache_stem(const TableKey& key, const RateGrid& grid);

void write_policy_csv(const PolicyTable& policy, const std::filesystem::path& path);
void write_slices_csv(const PolicyBuild& build, const std::filesystem::path& path);

/// Reads back the two files written above. Throws io::IoError when they
/// are malformed or do not belong to `key`.
PolicyBuild read_tables(const TableKey& key, const std::filesystem::path& policy_path,
                        const std::filesystem::path& slices_path);

/// Loads the table from `cache_dir` when present (and not forced), otherwise
/// builds and stores it. `hit` reports whether the cache was used.
PolicyBuild cached_policy(const TableKey& key, const std::filesystem::path& cache_dir, bool force,
                          bool* hit = nullptr);

}  // namespace optrates::cli
