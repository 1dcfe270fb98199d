#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "porestat/gpd.hpp"
#include "porestat/largest_pore.hpp"
#include "porestat/pore_geometry.hpp"

namespace porestat {

// Sub-threshold sizes: lognormal in µm, truncated above at the tail threshold.
struct BulkSpec {
  double log_mean = 0.0;  // mean of ln D
  double log_sd = 0.5;    // sd of ln D
};

// Fully known generative model: pores above the threshold arrive as a Poisson
// process with GPD sizes, pores below as an independent Poisson process with
// truncated-lognormal sizes.
struct GroundTruth {
  BulkSpec bulk;
  GpdParams tail;
  double lambda_above = 0.0;  // pores / mm³
  double lambda_below = 0.0;  // pores / mm³
  double specimen_volume_mm3 = 100.0;

  void validate() const;
};

/// One synthetic specimen. Pores are spheres, so Feret diameters equal D and
/// the surface area is πD².
SpecimenDataset generate_specimen(const GroundTruth& truth, std::uint64_t seed,
                                  std::string specimen_id = "synthetic");

/// Largest pore in each of `n_replications` independently simulated volumes
/// of interest (0 when a volume holds no pores), in replication order.
std::vector<double> brute_force_largest(const GroundTruth& truth, VolumeOfInterest voi,
                                        std::size_t n_replications, std::uint64_t seed,
                                        unsigned workers = 0);

struct OracleOptions {
  UncertaintyMode mode = UncertaintyMode::All;
  std::optional<std::uint64_t> pinned_count;
  unsigned workers = 0;
};

/// Direct simulation of the uncertainty model attached to a fit: per
/// replication draw a rate from its Gaussian estimate, N ~ Poisson(rate·V),
/// (σ, ξ) from the fit covariance, then N GPD sizes and keep the largest. With
/// N = 0, draw M ~ Poisson(λ_below·V) sizes from the sub-threshold record.
/// Shares no sampling code with sample_largest.
std::vector<double> brute_force_largest(const TailFit& fit, VolumeOfInterest voi,
                                        std::size_t n_replications, std::uint64_t seed,
                                        const OracleOptions& options = {});

/// exp(−λV(1 − F(d))): the largest-pore CDF for d ≥ µ when the count is
/// Poisson with known rate and the parameters are known.
double poisson_largest_cdf(const GpdParams& tail, double lambda_above, double volume_mm3, double d);

}  // namespace porestat
