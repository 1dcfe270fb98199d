#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "porestat/gpd.hpp"
#include "porestat/pore_geometry.hpp"

namespace porestat {

// One row of a threshold scan.
struct ThresholdCandidate {
  double threshold = 0.0;
  std::size_t n_exceed = 0;
  double mean_excess = 0.0;

  // Filled by stability_scan; unusable when the fit failed or carries no
  // covariance.
  bool usable = false;
  double scale = 0.0;
  double shape = 0.0;
  double sigma_star = 0.0;  // σ̂ − ξ̂µ
  double se_scale = 0.0;
  double se_shape = 0.0;
  double se_sigma_star = 0.0;  // delta method: Var σ̂ + µ²Var ξ̂ − 2µ Cov
  std::optional<double> stability_score;
  bool passes = false;
};

enum class SelectionMode { Auto, Manual };

struct ThresholdScan {
  std::vector<ThresholdCandidate> candidates;  // ascending threshold
  std::vector<std::string> warnings;
  std::optional<double> selected;
  SelectionMode mode = SelectionMode::Auto;
};

struct ScanOptions {
  std::size_t min_tail_count = 30;
  std::size_t window = 3;    // forward candidates compared against
  double tolerance = 0.5;    // in standard errors
};

/// Empirical quantiles of the sizes from 50% to 99% in 1% steps, ascending and
/// de-duplicated.
std::vector<double> default_candidate_grid(std::span<const double> sizes);

/// Theoretical mean excess σ/(1−ξ) + ξµ/(1−ξ) of an exact GPD tail. Throws
/// DomainError for ξ ≥ 1, where the mean is infinite.
double theoretical_mean_excess(double scale, double shape, double threshold);

/// Mean of (d − µ) over d > µ for each candidate. Candidates with fewer than
/// two exceedances (including any above the largest size) are dropped with a
/// warning.
ThresholdScan mean_excess_curve(std::span<const double> sizes, std::span<const double> candidates);
ThresholdScan mean_excess_curve(const SpecimenDataset& dataset, std::span<const double> candidates);

/// Mean-excess curve plus a tail fit at each candidate that keeps at least
/// `min_tail_count` exceedances, the modified scale σ* and a stability score:
/// the largest change in ξ̂ (in units of SE(ξ̂)) or σ* (in units of SE(σ*))
/// over the next `window` usable candidates.
ThresholdScan stability_scan(std::span<const double> sizes, std::span<const double> candidates,
                             const ScanOptions& options = {});
ThresholdScan stability_scan(const SpecimenDataset& dataset, std::span<const double> candidates,
                             const ScanOptions& options = {});

/// Auto: smallest candidate with score ≤ tolerance and enough exceedances.
/// Manual: `manual_value` verbatim. Records the choice in `scan`. Throws
/// ThresholdError listing the closest near-misses when nothing passes.
double select_threshold(ThresholdScan& scan, SelectionMode mode,
                        std::optional<double> manual_value = std::nullopt,
                        const ScanOptions& options = {});

/// Least-squares slope of mean excess against threshold over the scan rows.
double mean_excess_slope(const ThresholdScan& scan);

}  // namespace porestat
