#include "optrates/regret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "optrates/io.hpp"

namespace optrates {

namespace {
constexpr double kProvenanceTolerance = 1e-9;
}

RegretGrid::RegretGrid(ProblemContext ctx, Distribution dist, Criterion crit,
                       std::vector<double> rho, std::vector<double> delta)
    : ctx_(ctx), dist_(dist), crit_(crit), rho_(std::move(rho)), delta_(std::move(delta)) {
  if (delta_.size() != static_cast<std::size_t>(ctx_.n) * rho_.size())
    throw std::invalid_argument("regret grid has the wrong number of cells");
}

double RegretGrid::delta(int d, std::size_t i) const {
  if (d < 1 || d > ctx_.n || i >= rho_.size()) throw std::out_of_range("regret grid index");
  return delta_[static_cast<std::size_t>(d - 1) * rho_.size() + i];
}

double RegretGrid::tau(int d, std::size_t i) const { return tau_of(delta(d, i)); }

std::size_t RegretGrid::nearest(double rho) const {
  const auto it = std::lower_bound(rho_.begin(), rho_.end(), rho);
  if (it == rho_.begin()) return 0;
  if (it == rho_.end()) return rho_.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - rho_.begin());
  const std::size_t lo = hi - 1;
  if (dist_ == Distribution::Rls) return rho - rho_[lo] <= rho_[hi] - rho ? lo : hi;
  return std::log(rho / rho_[lo]) <= std::log(rho_[hi] / rho) ? lo : hi;
}

double tau_of(double delta) { return std::isinf(delta) && delta > 0 ? 0.0 : std::exp(-delta); }

RegretGrid build_grid(const RateGrid& grid, const std::vector<TimeSlice>& slices,
                      const PolicyTable& policy) {
  const int n = policy.n();
  if (grid.dist != policy.dist)
    throw std::invalid_argument("grid and policy use different distributions");
  if (slices.size() != static_cast<std::size_t>(n) ||
      policy.t_star.size() != static_cast<std::size_t>(n) + 1)
    throw std::invalid_argument("slices do not cover d = 1..n of the policy");
  std::vector<double> delta;
  delta.reserve(static_cast<std::size_t>(n) * grid.size());
  for (int d = 1; d <= n; ++d) {
    const TimeSlice& slice = slices[static_cast<std::size_t>(d - 1)];
    if (slice.d != d || slice.t.size() != grid.size())
      throw std::invalid_argument("slice for d=" + std::to_string(d) + " does not match the grid");
    const double t_star = policy.t_star[static_cast<std::size_t>(d)];
    if (policy.crit == Criterion::Opt && std::isfinite(t_star)) {
      const double lowest = *std::min_element(slice.t.begin(), slice.t.end());
      if (lowest < t_star * (1.0 - kProvenanceTolerance))
        throw std::invalid_argument("slice for d=" + std::to_string(d) +
                                    " undercuts the policy optimum; mismatched provenance");
    }
    for (double t : slice.t) {
      if (!std::isfinite(t))
        delta.push_back(std::numeric_limits<double>::infinity());
      else
        delta.push_back(t - t_star);
    }
  }
  return RegretGrid(policy.ctx, policy.dist, policy.crit, grid.values, std::move(delta));
}

RegretGrid build_grid(const PolicyBuild& build) {
  return build_grid(build.grid, build.slices, build.policy);
}

ModalityReport modality(const TimeSlice& slice, const std::vector<double>& rho) {
  if (slice.t.size() != rho.size())
    throw std::invalid_argument("slice and grid have different lengths");
  if (rho.size() < 3) throw std::invalid_argument("modality needs at least 3 grid points");

  // Collapse plateaus to their first (smallest-rho) index.
  std::vector<std::size_t> runs;
  for (std::size_t i = 0; i < slice.t.size(); ++i)
    if (runs.empty() || slice.t[i] != slice.t[runs.back()]) runs.push_back(i);

  ModalityReport report;
  report.d = slice.d;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    const double v = slice.t[runs[j]];
    const bool left_ok = j == 0 || v < slice.t[runs[j - 1]];
    const bool right_ok = j + 1 == runs.size() || v < slice.t[runs[j + 1]];
    if (left_ok && right_ok && std::isfinite(v)) report.local_minima.emplace_back(rho[runs[j]], v);
  }
  report.is_unimodal = report.local_minima.size() == 1;
  return report;
}

void export_heatmap(const RegretGrid& grid, const std::filesystem::path& csv_path,
                    const std::optional<std::filesystem::path>& pgm_path) {
  const int n = grid.n();
  const std::size_t rows = grid.rho().size();
  {
    auto out = io::open_output(csv_path);
    out << "d,rho,delta,tau\n";
    for (int d = 1; d <= n; ++d)
      for (std::size_t i = 0; i < rows; ++i)
        out << d << ',' << io::format_double(grid.rho()[i]) << ','
            << io::format_double(grid.delta(d, i)) << ',' << io::format_double(grid.tau(d, i))
            << '\n';
    if (!out) throw io::IoError("failed writing '" + csv_path.string() + "'");
  }
  if (!pgm_path) return;
  auto out = io::open_output(*pgm_path);
  out << "P2\n" << n << ' ' << rows << "\n255\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (int d = 1; d <= n; ++d) {
      const long pixel = std::clamp(std::lround(255.0 * grid.tau(d, i)), 0L, 255L);
      out << pixel << (d == n ? '\n' : ' ');
    }
  }
  if (!out) throw io::IoError("failed writing '" + pgm_path->string() + "'");
}

}  // namespace optrates
