#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "optrates/dp.hpp"

namespace optrates {

/// Regret delta(d, rho) = T(d, rho) - T*(d) and its heat value
/// tau = exp(-delta) over d in [1, n] and the parameter grid. Infinite
/// regret maps to tau = 0.
class RegretGrid {
 public:
  RegretGrid(ProblemContext ctx, Distribution dist, Criterion crit, std::vector<double> rho,
             std::vector<double> delta);

  const ProblemContext& ctx() const { return ctx_; }
  Distribution dist() const { return dist_; }
  Criterion crit() const { return crit_; }
  int n() const { return ctx_.n; }
  const std::vector<double>& rho() const { return rho_; }

  double delta(int d, std::size_t i) const;
  double tau(int d, std::size_t i) const;

  /// Index of the grid point closest to rho (log scale for the EA grids).
  std::size_t nearest(double rho) const;

 private:
  ProblemContext ctx_;
  Distribution dist_;
  Criterion crit_;
  std::vector<double> rho_;
  std::vector<double> delta_;  // row-major, (d - 1) * rho.size() + i
};

double tau_of(double delta);

/// Throws std::invalid_argument when the slices do not belong to `policy`
/// (wrong sizes, or an Opt slice whose minimum lies below t_star).
RegretGrid build_grid(const RateGrid& grid, const std::vector<TimeSlice>& slices,
                      const PolicyTable& policy);

RegretGrid build_grid(const PolicyBuild& build);

struct ModalityReport {
  int d = 0;
  std::vector<std::pair<double, double>> local_minima;  // (rho, t)
  bool is_unimodal = false;
};

/// Strict local minima of t over the ordered grid. Runs of equal neighbours
/// are merged first and represented by their smallest rho.
ModalityReport modality(const TimeSlice& slice, const std::vector<double>& rho);

/// Writes `d,rho,delta,tau` to csv_path and, if requested, an ASCII P2
/// graymap with one row per grid rho (ascending, top to bottom), one column
/// per distance and pixel round(255 tau). Throws std::runtime_error with
/// the offending path on I/O failure.
void export_heatmap(const RegretGrid& grid, const std::filesystem::path& csv_path,
                    const std::optional<std::filesystem::path>& pgm_path = std::nullopt);

}  // namespace optrates
