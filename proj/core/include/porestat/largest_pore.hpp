#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "porestat/gpd.hpp"
#include "porestat/pore_geometry.hpp"

namespace porestat {

class VolumeOfInterest {
 public:
  explicit VolumeOfInterest(double volume_mm3);
  double mm3() const noexcept { return volume_mm3_; }

 private:
  double volume_mm3_;
};

/// F(d)^N: probability that the largest of N exceedances is at most d.
double largest_cdf_closed(const GpdParams& params, std::uint64_t n_pores, double d);

/// Inverse of largest_cdf_closed: σ/ξ·((1 − p^(1/N))^(−ξ) − 1) + µ.
double largest_quantile_closed(const GpdParams& params, std::uint64_t n_pores, double p);

struct RateEstimate {
  double rate = 0.0;      // pores / mm³
  double variance = 0.0;  // rate / count
  std::size_t count = 0;
  bool empty() const noexcept { return count == 0; }
  double standard_error() const;
};

struct Rates {
  RateEstimate above;
  RateEstimate below;
};

/// Poisson rates on each side of `threshold` (above: D_s > µ).
Rates estimate_rates(const SpecimenDataset& dataset, double threshold);

/// Full pipeline step: tail fit via select_estimator at `threshold`, rates and
/// the sub-threshold record attached. `forced` bypasses the selection rule.
/// Throws FitError with fewer than `min_tail_count` exceedances.
TailFit fit_specimen(const SpecimenDataset& dataset, double threshold,
                     const FitOptions& options = {},
                     std::optional<Estimator> forced = std::nullopt);

enum class UncertaintyMode {
  None,         // point estimates, N pinned at round(λ̂V)
  PoissonOnly,  // N ~ Poisson(λV) with λ from its Gaussian estimate
  All,          // plus (σ, ξ) from the asymptotic bivariate normal
};

std::string_view to_string(UncertaintyMode m) noexcept;
std::optional<UncertaintyMode> uncertainty_mode_from_string(std::string_view s) noexcept;

// Histogram support. offset > 0 spaces the edges uniformly in
// log1p((d − lower)/offset); offset = 0 gives uniform bins.
struct HistogramRange {
  double lower = 0.0;
  double upper = 1.0;
  double offset = 0.0;
};

struct McConfig {
  std::size_t n_count_samples = 1000;
  std::size_t n_p_samples = 1000;
  std::size_t n_param_samples = 1000;
  std::size_t histogram_bins = 2048;
  std::uint64_t seed = 0;
  UncertaintyMode mode = UncertaintyMode::All;

  // Execution only; never changes the result.
  unsigned workers = 0;

  // Overrides round(λ̂V) for the count in mode None.
  std::optional<std::uint64_t> pinned_count;
  // Fixed histogram grid instead of the pilot-run estimate. After a run the
  // distribution's provenance records the grid actually used.
  std::optional<HistogramRange> range;

  void validate() const;

  // 464³ ≈ 10⁸ combinations.
  static McConfig desk_profile(std::uint64_t seed);
};

struct DistributionSummary {
  double mean = 0.0;
  double p2_5 = 0.0;
  double p50 = 0.0;
  double p97_5 = 0.0;
  double no_pore_mass = 0.0;
};

struct Provenance {
  std::string fit_id;
  double volume_mm3 = 0.0;
  McConfig config;
};

// Histogram approximation of the largest-pore distribution. A sample of
// "no pores" is an atom at D = 0; samples outside [lo, hi] go to the under- or
// overflow counters. The CDF is the running sum of bin masses, linear inside a
// bin.
class LargestPoreDistribution {
 public:
  LargestPoreDistribution(std::vector<double> edges, std::vector<std::uint64_t> counts,
                          std::uint64_t no_pore, std::uint64_t underflow, std::uint64_t overflow,
                          double mean);

  // Builds from probability masses (sums to at most 1 together with the
  // atoms); mean from bin centres unless given.
  static LargestPoreDistribution from_masses(std::vector<double> edges, std::vector<double> masses,
                                             double no_pore_mass, double overflow_mass = 0.0,
                                             std::optional<double> mean = std::nullopt,
                                             double underflow_mass = 0.0);

  std::span<const double> edges() const noexcept { return edges_; }
  std::span<const double> masses() const noexcept { return masses_; }
  std::span<const double> cdf_at_edges() const noexcept { return cdf_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t total_samples() const noexcept { return total_; }

  double no_pore_mass() const noexcept { return no_pore_mass_; }
  double underflow_mass() const noexcept { return underflow_mass_; }
  double overflow_mass() const noexcept { return overflow_mass_; }
  double mean() const noexcept { return mean_; }
  double lower() const noexcept { return edges_.front(); }
  double upper() const noexcept { return edges_.back(); }
  std::size_t bins() const noexcept { return masses_.size(); }

  double cdf(double d) const;
  double percentile(double p) const;
  DistributionSummary summary() const;

  Provenance provenance;
  std::vector<std::string> warnings;

 private:
  std::vector<double> edges_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> masses_;
  std::vector<double> cdf_;
  std::uint64_t total_ = 0;
  double no_pore_mass_ = 0.0;
  double underflow_mass_ = 0.0;
  double overflow_mass_ = 0.0;
  double mean_ = 0.0;
};

/// Monte Carlo distribution of the largest pore in `voi`.
///
/// The count axis is split into n_count_samples blocks. Block i draws a rate
/// from its Gaussian estimate (clamped at 0), N_i ~ Poisson(rate·V), and then
/// its own n_param_samples (σ, ξ) pairs and n_p_samples uniforms p. Every
/// (pair, p) combination of the block is evaluated with the closed-form
/// inverse for N_i ≥ 1. For N_i = 0 the sub-threshold record is used: per p,
/// M ~ Poisson(λ_below·V) and the right-continuous inverse of the empirical
/// CDF at p^(1/M) (M = 0 is the no-pore atom). Parameter pairs collapse to the
/// point estimate outside mode All.
///
/// Each block has its own seed stream derived from (seed, block index) and
/// histogram counts are integers, so the result is bit-identical for any
/// number of workers. Memory is O(bins + n_count + n_param + n_p).
LargestPoreDistribution sample_largest(const TailFit& fit, VolumeOfInterest voi,
                                       const McConfig& config);

struct VolumeSummary {
  double volume_mm3 = 0.0;
  DistributionSummary summary;
};

/// sample_largest at each volume (positive, ascending).
std::vector<VolumeSummary> volume_sweep(const TailFit& fit, std::span<const double> volumes_mm3,
                                        const McConfig& config);

}  // namespace porestat
