#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "porestat/largest_pore.hpp"
#include "porestat/pore_geometry.hpp"

namespace porestat {

// Right-continuous step CDF: F(x) = values[k] for points[k] ≤ x < points[k+1],
// 0 before the first point. Points strictly ascending, values nondecreasing.
struct StepCdf {
  std::vector<double> points;
  std::vector<double> values;

  double operator()(double x) const;
};

StepCdf empirical_cdf(std::span<const double> samples);

/// F evaluated on `grid`, as a step CDF jumping only at grid points.
template <class Cdf>
StepCdf sample_on_grid(const Cdf& cdf, std::span<const double> grid) {
  StepCdf out;
  out.points.assign(grid.begin(), grid.end());
  out.values.reserve(grid.size());
  for (double x : grid) out.values.push_back(cdf(x));
  return out;
}

/// The distribution's CDF at its bin edges, preceded by the no-pore atom at 0
/// when present.
StepCdf to_step_cdf(const LargestPoreDistribution& dist);

/// sup |F_a − F_b| over the merged jump points.
double ks_statistic(const StepCdf& a, const StepCdf& b);

/// One-sample KS distance of `samples` from Uniform(0, 1).
double ks_uniform_statistic(std::span<const double> samples);

/// Asymptotic Kolmogorov tail probability P(D_n ≥ d) with Stephens' small-n
/// correction.
double kolmogorov_p_value(double d, std::size_t n);

/// CDF at `observed` (linear inside a bin; the no-pore atom sits at 0).
double q_value(const LargestPoreDistribution& dist, double observed);

/// True when `observed` lies above the histogram range, where q_value can only
/// report the mass below the upper edge.
bool beyond_histogram(const LargestPoreDistribution& dist, double observed);

/// P(|D − mean| ≥ |observed − mean|), each bin's mass placed at its centre.
double p_value(const LargestPoreDistribution& dist, double observed);

/// One-sided P(D ≥ observed) = 1 − q.
double upper_p_value(const LargestPoreDistribution& dist, double observed);

struct EquivalenceReport {
  std::string coupon_fit_id;
  std::string part_specimen_id;
  double observed_largest_um = 0.0;
  double q_value = 0.0;
  double p_value = 0.0;
  double upper_p_value = 0.0;
  double volume_mm3 = 0.0;
  bool beyond_histogram = false;
  std::optional<double> cartesian_distance_mm;
  std::optional<double> radial_distance_mm;
};

EquivalenceReport compare_observed(const LargestPoreDistribution& dist, double observed_um,
                                   std::string part_specimen_id);

struct PlateExtents {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  PlatePosition centre() const noexcept {
    return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)};
  }
};

struct ScatterRow {
  std::string pair_id;
  double cartesian_distance_mm = 0.0;
  double radial_distance_mm = 0.0;
  double p_value = 0.0;
  double q_value = 0.0;
};

struct ScatterTable {
  std::vector<ScatterRow> rows;
  std::vector<std::string> warnings;
};

double cartesian_distance(const PlatePosition& a, const PlatePosition& b) noexcept;
double radial_distance(const PlatePosition& a, const PlatePosition& b,
                       const PlatePosition& centre) noexcept;

/// Distance-versus-similarity rows. `positions` maps specimen / fit ids to
/// plate coordinates; reports with either position missing are skipped with a
/// warning.
ScatterTable location_scatter(std::span<const EquivalenceReport> reports,
                              const std::map<std::string, PlatePosition>& positions,
                              const PlatePosition& plate_centre = {});

// One volume of the mode comparison: KS distance between the largest-pore
// distributions under each pair of uncertainty modes.
struct ModeKsRow {
  double volume_mm3 = 0.0;
  double none_vs_poisson_only = 0.0;
  double none_vs_all = 0.0;
  double poisson_only_vs_all = 0.0;
};

/// Runs sample_largest in all three modes at each volume with `config`
/// (mode ignored). Per volume the three runs share the histogram grid of the
/// mode-all run, so the distances are exact on a common grid.
std::vector<ModeKsRow> ks_mode_matrix(const TailFit& fit, std::span<const double> volumes_mm3,
                                      const McConfig& config);

}  // namespace porestat
