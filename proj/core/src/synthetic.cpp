#include "porestat/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include <boost/math/distributions/lognormal.hpp>
#include <fmt/format.h>

#include "porestat/error.hpp"
#include "porestat/seeding.hpp"

namespace porestat {

namespace {

constexpr std::size_t kChunk = 4096;

// Inverse-CDF GPD draw from u ∈ [0, 1), written out independently of
// gpd_quantile.
double draw_gpd(double mu, double sigma, double xi, double u) {
  const double survival = 1.0 - u;
  if (std::abs(xi) < kShapeSwitch) return mu - sigma * std::log(survival);
  return mu + sigma / xi * (std::pow(survival, -xi) - 1.0);
}

class TruncatedLognormal {
 public:
  TruncatedLognormal(const BulkSpec& spec, double upper)
      : dist_(spec.log_mean, spec.log_sd), top_(boost::math::cdf(dist_, upper)), upper_(upper) {}

  double operator()(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, top_);
    double v = 0.0;
    do {
      v = u(rng);
    } while (v <= 0.0);
    return std::min(boost::math::quantile(dist_, v), upper_);
  }

  double mass() const noexcept { return top_; }

 private:
  boost::math::lognormal_distribution<double> dist_;
  double top_;
  double upper_;
};

template <class Body>
void for_chunks(std::size_t n, unsigned workers, Body&& body) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  workers = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(chunks, 1)));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < chunks; c += workers) {
          body(c, c * kChunk, std::min(n, (c + 1) * kChunk));
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::uint64_t poisson(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(rng);
}

}  // namespace

void GroundTruth::validate() const {
  tail.validate();
  if (!(lambda_above >= 0.0) || !(lambda_below >= 0.0)) {
    throw DomainError("ground truth: rates must be non-negative");
  }
  if (!(specimen_volume_mm3 > 0.0)) throw DomainError("ground truth: specimen volume must be positive");
  if (!(bulk.log_sd > 0.0)) throw DomainError("ground truth: bulk log_sd must be positive");
  if (lambda_below > 0.0) {
    if (!(tail.threshold > 0.0)) {
      throw DomainError("ground truth: sub-threshold pores need a positive threshold");
    }
    if (!(TruncatedLognormal(bulk, tail.threshold).mass() > 0.0)) {
      throw DomainError("ground truth: bulk distribution has no mass below the threshold");
    }
  }
}

SpecimenDataset generate_specimen(const GroundTruth& truth, std::uint64_t seed,
                                  std::string specimen_id) {
  truth.validate();
  Rng rng = make_rng(seed, streams::kSpecimen, 0);
  const double v = truth.specimen_volume_mm3;
  const std::uint64_t n_tail = poisson(truth.lambda_above * v, rng);
  const std::uint64_t n_bulk = poisson(truth.lambda_below * v, rng);

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> sizes;
  sizes.reserve(n_tail + n_bulk);
  for (std::uint64_t i = 0; i < n_tail; ++i) {
    double d = 0.0;
    do {
      d = draw_gpd(truth.tail.threshold, truth.tail.scale, truth.tail.shape, uniform(rng));
    } while (!(d > truth.tail.threshold));
    sizes.push_back(d);
  }
  if (n_bulk > 0) {
    const TruncatedLognormal bulk(truth.bulk, truth.tail.threshold);
    for (std::uint64_t i = 0; i < n_bulk; ++i) sizes.push_back(bulk(rng));
  }

  std::vector<PoreRecord> pores;
  pores.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double d = sizes[i];
    const double volume = std::numbers::pi * d * d * d / 6.0;
    const double area = std::numbers::pi * d * d;
    pores.push_back(make_pore(fmt::format("p{}", i + 1), volume, area, d, d));
  }
  SpecimenMetadata meta;
  meta.specimen_id = std::move(specimen_id);
  meta.geometry_label = "synthetic";
  meta.scanned_volume_mm3 = v;
  return SpecimenDataset(std::move(meta), std::move(pores));
}

std::vector<double> brute_force_largest(const GroundTruth& truth, VolumeOfInterest voi,
                                        std::size_t n_replications, std::uint64_t seed,
                                        unsigned workers) {
  truth.validate();
  std::vector<double> out(n_replications, 0.0);
  const double v = voi.mm3();
  std::optional<TruncatedLognormal> bulk;
  if (truth.lambda_below > 0.0) bulk.emplace(truth.bulk, truth.tail.threshold);

  for_chunks(n_replications, workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng = make_rng(seed, streams::kOracle, chunk);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t r = begin; r < end; ++r) {
      const std::uint64_t n_tail = poisson(truth.lambda_above * v, rng);
      double largest = 0.0;
      // Every bulk pore lies below the threshold, so with any tail pore present
      // the bulk cannot hold the maximum.
      if (n_tail > 0) {
        for (std::uint64_t i = 0; i < n_tail; ++i) {
          largest = std::max(largest, draw_gpd(truth.tail.threshold, truth.tail.scale,
                                               truth.tail.shape, uniform(rng)));
        }
      } else if (bulk) {
        const std::uint64_t n_bulk = poisson(truth.lambda_below * v, rng);
        for (std::uint64_t i = 0; i < n_bulk; ++i) largest = std::max(largest, (*bulk)(rng));
      }
      out[r] = largest;
    }
  });
  return out;
}

std::vector<double> brute_force_largest(const TailFit& fit, VolumeOfInterest voi,
                                        std::size_t n_replications, std::uint64_t seed,
                                        const OracleOptions& options) {
  fit.params.validate();
  double l11 = 0.0, l21 = 0.0, l22 = 0.0;
  if (options.mode == UncertaintyMode::All) {
    if (!fit.covariance) throw RefusalError("oracle: fit has no covariance");
    const auto& c = *fit.covariance;
    l11 = std::sqrt(c.scale_scale);
    l21 = c.scale_shape / l11;
    l22 = std::sqrt(std::max(0.0, c.shape_shape - l21 * l21));
  }
  const double v = voi.mm3();
  const double rate_sd = std::sqrt(std::max(0.0, fit.lambda_above_var));
  const auto& below = fit.empirical_below;

  std::vector<double> out(n_replications, 0.0);
  for_chunks(n_replications, options.workers,
             [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng = make_rng(seed, streams::kOracle, chunk);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t r = begin; r < end; ++r) {
      std::uint64_t n_tail = 0;
      std::uint64_t n_below = 0;
      if (options.mode == UncertaintyMode::None) {
        n_tail = options.pinned_count.value_or(
            static_cast<std::uint64_t>(std::llround(fit.lambda_above * v)));
        n_below = static_cast<std::uint64_t>(std::llround(fit.lambda_below * v));
      } else {
        const double rate = std::max(0.0, fit.lambda_above + rate_sd * normal(rng));
        n_tail = poisson(rate * v, rng);
        n_below = n_tail == 0 ? poisson(fit.lambda_below * v, rng) : 0;
      }

      double sigma = fit.params.scale;
      double xi = fit.params.shape;
      if (options.mode == UncertaintyMode::All && n_tail > 0) {
        do {
          const double z1 = normal(rng);
          const double z2 = normal(rng);
          sigma = fit.params.scale + l11 * z1;
          xi = fit.params.shape + l21 * z1 + l22 * z2;
        } while (!(sigma > 0.0));
      }

      double largest = 0.0;
      if (n_tail > 0) {
        for (std::uint64_t i = 0; i < n_tail; ++i) {
          largest = std::max(largest, draw_gpd(fit.params.threshold, sigma, xi, uniform(rng)));
        }
      } else if (!below.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, below.size() - 1);
        for (std::uint64_t i = 0; i < n_below; ++i) largest = std::max(largest, below[pick(rng)]);
      }
      out[r] = largest;
    }
  });
  return out;
}

double poisson_largest_cdf(const GpdParams& tail, double lambda_above, double volume_mm3, double d) {
  return std::exp(-lambda_above * volume_mm3 * (1.0 - gpd_cdf(tail, d)));
}

}  // namespace porestat
