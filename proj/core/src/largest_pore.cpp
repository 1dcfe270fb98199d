#include "porestat/largest_pore.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "porestat/error.hpp"
#include "porestat/seeding.hpp"

namespace porestat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Inverse of F^N given log(1 − p^(1/N)).
inline double tail_value(double mu, double sigma, double xi, double log_t) noexcept {
  if (std::abs(xi) < kShapeSwitch) return mu - sigma * log_t;
  return mu + sigma / xi * std::expm1(-xi * log_t);
}

// log(1 − p^(1/N)) without cancellation for large N.
inline double log_one_minus_root(double p, double n) noexcept {
  return std::log(-std::expm1(std::log(p) / n));
}

}  // namespace

VolumeOfInterest::VolumeOfInterest(double volume_mm3) : volume_mm3_(volume_mm3) {
  if (!(volume_mm3 > 0.0) || !std::isfinite(volume_mm3)) {
    throw DomainError(fmt::format("volume of interest must be positive, got {} mm³", volume_mm3));
  }
}

double largest_cdf_closed(const GpdParams& params, std::uint64_t n_pores, double d) {
  params.validate();
  if (n_pores == 0) throw DomainError("largest_cdf_closed: needs at least one pore above threshold");
  if (!(d > params.threshold)) return 0.0;
  const double z = (d - params.threshold) / params.scale;
  double log_survival = 0.0;
  if (std::abs(params.shape) < kShapeSwitch) {
    log_survival = -z;
  } else {
    const double arg = params.shape * z;
    if (arg <= -1.0) return 1.0;
    log_survival = -std::log1p(arg) / params.shape;
  }
  return std::exp(static_cast<double>(n_pores) * std::log1p(-std::exp(log_survival)));
}

double largest_quantile_closed(const GpdParams& params, std::uint64_t n_pores, double p) {
  params.validate();
  if (n_pores == 0) {
    throw DomainError("largest_quantile_closed: needs at least one pore above threshold");
  }
  if (!(p >= 0.0) || p > 1.0) {
    throw DomainError(fmt::format("largest_quantile_closed: probability must lie in [0, 1), got {}", p));
  }
  if (p == 1.0) {
    if (params.shape >= -kShapeSwitch) {
      throw DomainError("largest_quantile_closed: p = 1 is unbounded for a non-negative shape");
    }
    return params.upper_bound();
  }
  if (p == 0.0) return params.threshold;
  return tail_value(params.threshold, params.scale, params.shape,
                    log_one_minus_root(p, static_cast<double>(n_pores)));
}

double RateEstimate::standard_error() const { return std::sqrt(variance); }

Rates estimate_rates(const SpecimenDataset& dataset, double threshold) {
  const double v = dataset.metadata().scanned_volume_mm3;
  const std::size_t n_above = dataset.count_above(threshold);
  const std::size_t n_below = dataset.size() - n_above;
  auto make = [v](std::size_t count) {
    RateEstimate r;
    r.count = count;
    r.rate = static_cast<double>(count) / v;
    r.variance = count == 0 ? 0.0 : r.rate / static_cast<double>(count);
    return r;
  };
  return Rates{make(n_above), make(n_below)};
}

TailFit fit_specimen(const SpecimenDataset& dataset, double threshold, const FitOptions& options,
                     std::optional<Estimator> forced) {
  const auto d = dataset.diameters();
  const std::size_t n_above = dataset.count_above(threshold);
  const auto tail = d.first(n_above);
  TailFit fit = !forced                     ? select_estimator(tail, threshold, options)
                : *forced == Estimator::Mle ? fit_mle(tail, threshold, options)
                                            : fit_mom(tail, threshold, options);
  const Rates rates = estimate_rates(dataset, threshold);
  fit.id = dataset.metadata().specimen_id;
  fit.lambda_above = rates.above.rate;
  fit.lambda_above_var = rates.above.variance;
  fit.lambda_below = rates.below.rate;
  fit.lambda_below_var = rates.below.variance;
  fit.scanned_volume_mm3 = dataset.metadata().scanned_volume_mm3;
  fit.empirical_below.assign(d.rbegin(), d.rbegin() + static_cast<std::ptrdiff_t>(rates.below.count));
  if (rates.above.empty()) fit.add_flag(FitFlag::NoExceedances);
  return fit;
}

std::string_view to_string(UncertaintyMode m) noexcept {
  switch (m) {
    case UncertaintyMode::None: return "none";
    case UncertaintyMode::PoissonOnly: return "poisson_only";
    case UncertaintyMode::All: return "all";
  }
  return "all";
}

std::optional<UncertaintyMode> uncertainty_mode_from_string(std::string_view s) noexcept {
  if (s == "none") return UncertaintyMode::None;
  if (s == "poisson_only") return UncertaintyMode::PoissonOnly;
  if (s == "all") return UncertaintyMode::All;
  return std::nullopt;
}

void McConfig::validate() const {
  if (n_count_samples < 1 || n_p_samples < 1 || n_param_samples < 1) {
    throw DomainError("Monte Carlo sample counts must all be at least 1");
  }
  if (histogram_bins < 16) {
    throw DomainError(fmt::format("histogram needs at least 16 bins, got {}", histogram_bins));
  }
  if (range && (!(range->upper > range->lower) || !(range->offset >= 0.0))) {
    throw DomainError("histogram range must have upper > lower and a non-negative offset");
  }
}

McConfig McConfig::desk_profile(std::uint64_t seed) {
  McConfig c;
  c.n_count_samples = 464;
  c.n_p_samples = 464;
  c.n_param_samples = 464;
  c.seed = seed;
  return c;
}

LargestPoreDistribution::LargestPoreDistribution(std::vector<double> edges,
                                                 std::vector<std::uint64_t> counts,
                                                 std::uint64_t no_pore, std::uint64_t underflow,
                                                 std::uint64_t overflow, double mean)
    : edges_(std::move(edges)), counts_(std::move(counts)), mean_(mean) {
  if (edges_.size() != counts_.size() + 1 || counts_.empty()) {
    throw DomainError("distribution: edges must have one more entry than counts");
  }
  total_ = no_pore + underflow + overflow;
  for (auto c : counts_) total_ += c;
  if (total_ == 0) throw DomainError("distribution: no samples");
  const double t = static_cast<double>(total_);
  no_pore_mass_ = static_cast<double>(no_pore) / t;
  underflow_mass_ = static_cast<double>(underflow) / t;
  overflow_mass_ = static_cast<double>(overflow) / t;
  masses_.resize(counts_.size());
  cdf_.resize(edges_.size());
  // Prefix sums in integers so cdf + overflow is 1 up to one rounding.
  std::uint64_t running = no_pore + underflow;
  cdf_[0] = static_cast<double>(running) / t;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    masses_[k] = static_cast<double>(counts_[k]) / t;
    running += counts_[k];
    cdf_[k + 1] = static_cast<double>(running) / t;
  }
}

LargestPoreDistribution LargestPoreDistribution::from_masses(std::vector<double> edges,
                                                             std::vector<double> masses,
                                                             double no_pore_mass,
                                                             double overflow_mass,
                                                             std::optional<double> mean,
                                                             double underflow_mass) {
  if (edges.size() != masses.size() + 1 || masses.empty()) {
    throw DomainError("distribution: edges must have one more entry than masses");
  }
  LargestPoreDistribution d({0.0, 1.0}, {1}, 0, 0, 0, 0.0);
  d.edges_ = std::move(edges);
  d.masses_ = std::move(masses);
  d.counts_.clear();
  d.total_ = 0;
  d.no_pore_mass_ = no_pore_mass;
  d.underflow_mass_ = underflow_mass;
  d.overflow_mass_ = overflow_mass;
  d.cdf_.assign(d.edges_.size(), 0.0);
  d.cdf_[0] = no_pore_mass + underflow_mass;
  double m = 0.0;
  for (std::size_t k = 0; k < d.masses_.size(); ++k) {
    d.cdf_[k + 1] = d.cdf_[k] + d.masses_[k];
    m += d.masses_[k] * 0.5 * (d.edges_[k] + d.edges_[k + 1]);
  }
  m += overflow_mass * d.edges_.back();
  d.mean_ = mean.value_or(m);
  return d;
}

double LargestPoreDistribution::cdf(double d) const {
  if (d < 0.0) return 0.0;
  if (d < edges_.front()) return no_pore_mass_;
  if (d >= edges_.back()) return cdf_.back();
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), d);
  const std::size_t k = static_cast<std::size_t>(it - edges_.begin()) - 1;
  const double w = edges_[k + 1] - edges_[k];
  const double frac = w > 0.0 ? (d - edges_[k]) / w : 1.0;
  return cdf_[k] + frac * (cdf_[k + 1] - cdf_[k]);
}

double LargestPoreDistribution::percentile(double p) const {
  if (!(p >= 0.0) || p > 1.0) throw DomainError(fmt::format("percentile: p = {} outside [0, 1]", p));
  if (p <= no_pore_mass_ && no_pore_mass_ > 0.0) return 0.0;
  if (p <= cdf_.front()) return edges_.front();
  if (p > cdf_.back()) return kInf;
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), p);
  const std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
  const double lo = cdf_[k - 1];
  const double hi = cdf_[k];
  const double frac = hi > lo ? (p - lo) / (hi - lo) : 1.0;
  return edges_[k - 1] + frac * (edges_[k] - edges_[k - 1]);
}

DistributionSummary LargestPoreDistribution::summary() const {
  return DistributionSummary{mean_, percentile(0.025), percentile(0.5), percentile(0.975),
                             no_pore_mass_};
}

namespace {

// Histogram edges uniform in log1p((d − lo)/offset); offset 0 means uniform.
struct Grid {
  double lo = 0.0;
  double hi = 1.0;
  double offset = 0.0;
  std::size_t bins = 16;
  double step = 1.0;  // in the transformed coordinate

  Grid(double lo_, double hi_, double offset_, std::size_t bins_)
      : lo(lo_), hi(hi_), offset(offset_), bins(bins_) {
    step = (offset > 0.0 ? std::log1p((hi - lo) / offset) : (hi - lo)) / static_cast<double>(bins);
  }

  std::vector<double> edges() const {
    std::vector<double> e(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) {
      const double y = step * static_cast<double>(k);
      e[k] = offset > 0.0 ? lo + offset * std::expm1(y) : lo + y;
    }
    e.front() = lo;
    e.back() = hi;
    return e;
  }

  // Bin index, or bins for overflow; caller handles d < lo.
  std::size_t index(double d) const noexcept {
    if (!(d <= hi)) return bins;
    const double y = offset > 0.0 ? std::log1p((d - lo) / offset) : (d - lo);
    return std::min(static_cast<std::size_t>(y / step), bins - 1);
  }
};

struct Accumulator {
  std::vector<std::uint64_t> counts;
  std::uint64_t no_pore = 0;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;
  std::uint64_t missing_record = 0;
};

struct Model {
  UncertaintyMode mode;
  double volume;
  GpdParams point;
  double rate_mean, rate_sd;
  double below_rate;
  // Cholesky factor of the (σ, ξ) covariance.
  double l11 = 0.0, l21 = 0.0, l22 = 0.0;
  std::span<const double> empirical_below;
  std::optional<std::uint64_t> pinned_count;
  std::uint64_t pinned_below = 0;
};

struct BlockShape {
  std::size_t n_param;
  std::size_t n_p;
};

// Runs count block `index`, calling emit(value, weight) for every evaluated
// combination and atom(weight) for no-pore outcomes. Returns nothing; all
// randomness comes from `rng`.
template <class Emit, class Atom>
void run_block(const Model& m, const BlockShape& shape, Rng& rng, Emit&& emit, Atom&& atom,
               std::uint64_t& missing_record) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::uint64_t n_tail = 0;
  if (m.mode == UncertaintyMode::None) {
    n_tail = m.pinned_count.value_or(
        static_cast<std::uint64_t>(std::llround(m.rate_mean * m.volume)));
  } else {
    const double rate = std::max(0.0, m.rate_mean + m.rate_sd * normal(rng));
    const double mean = rate * m.volume;
    if (mean > 0.0) n_tail = std::poisson_distribution<std::uint64_t>(mean)(rng);
  }

  struct Pair {
    double sigma, xi;
  };
  std::vector<Pair> pairs;
  if (m.mode == UncertaintyMode::All) {
    pairs.reserve(shape.n_param);
    for (std::size_t j = 0; j < shape.n_param; ++j) {
      int tries = 0;
      while (true) {
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        const double sigma = m.point.scale + m.l11 * z1;
        const double xi = m.point.shape + m.l21 * z1 + m.l22 * z2;
        if (sigma > 0.0) {
          pairs.push_back({sigma, xi});
          break;
        }
        if (++tries >= 1000) {
          throw RefusalError("parameter sampling: 1000 consecutive draws with σ ≤ 0");
        }
      }
    }
  } else {
    pairs.push_back({m.point.scale, m.point.shape});
  }

  std::vector<double> p(shape.n_p);
  for (auto& v : p) v = uniform(rng);

  const auto weight = static_cast<std::uint64_t>(pairs.size());
  if (n_tail >= 1) {
    const double n = static_cast<double>(n_tail);
    for (auto& v : p) v = log_one_minus_root(v, n);
    for (const auto& pr : pairs) {
      for (double log_t : p) emit(tail_value(m.point.threshold, pr.sigma, pr.xi, log_t), 1);
    }
    return;
  }

  // No exceedances: largest of M sub-threshold pores from the empirical record.
  std::poisson_distribution<std::uint64_t> below_count(std::max(m.below_rate * m.volume, 1e-300));
  const auto& emp = m.empirical_below;
  for (double u : p) {
    std::uint64_t n_below = 0;
    if (m.mode == UncertaintyMode::None) {
      n_below = m.pinned_below;
    } else if (m.below_rate * m.volume > 0.0) {
      n_below = below_count(rng);
    }
    if (n_below == 0) {
      atom(weight);
      continue;
    }
    if (emp.empty()) {
      ++missing_record;
      atom(weight);
      continue;
    }
    const double q = std::exp(std::log(u) / static_cast<double>(n_below));
    const double pos = std::ceil(q * static_cast<double>(emp.size()));
    const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(emp.size()))) - 1;
    emit(emp[idx], weight);
  }
}

Model make_model(const TailFit& fit, double volume, const McConfig& config) {
  Model m;
  m.mode = config.mode;
  m.volume = volume;
  m.point = fit.params;
  m.rate_mean = fit.lambda_above;
  m.rate_sd = std::sqrt(std::max(fit.lambda_above_var, 0.0));
  m.below_rate = fit.lambda_below;
  m.empirical_below = fit.empirical_below;
  m.pinned_count = config.pinned_count;
  m.pinned_below = static_cast<std::uint64_t>(std::llround(fit.lambda_below * volume));
  if (config.mode == UncertaintyMode::All) {
    if (!fit.covariance || fit.has_flag(FitFlag::CovarianceUnavailable)) {
      throw RefusalError(fmt::format(
          "fit '{}' has no covariance matrix; full uncertainty propagation refused", fit.id));
    }
    const auto& c = *fit.covariance;
    if (!c.positive_semidefinite()) throw RefusalError("fit covariance is not positive semi-definite");
    m.l11 = std::sqrt(c.scale_scale);
    m.l21 = m.l11 > 0.0 ? c.scale_shape / m.l11 : 0.0;
    m.l22 = std::sqrt(std::max(c.shape_shape - m.l21 * m.l21, 0.0));
  }
  return m;
}

// Calls body(block_index, worker_index) for every block across `workers`
// threads; rethrows the first exception.
template <class Body>
void parallel_blocks(std::size_t n_blocks, unsigned workers, Body&& body) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n_blocks));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = next.fetch_add(1); i < n_blocks; i = next.fetch_add(1)) body(i, w);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n_blocks);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

Grid pilot_grid(const Model& model, const McConfig& config, double lo) {
  const std::size_t n_blocks = std::min<std::size_t>(config.n_count_samples, 64);
  const BlockShape shape{std::min<std::size_t>(config.n_param_samples, 64),
                         std::min<std::size_t>(config.n_p_samples, 64)};
  std::vector<double> values;
  std::uint64_t atoms = 0;
  std::uint64_t missing = 0;
  for (std::size_t i = 0; i < n_blocks; ++i) {
    Rng rng = make_rng(config.seed, streams::kPilot, i);
    run_block(
        model, shape, rng,
        [&](double v, std::uint64_t w) { values.insert(values.end(), w, v); },
        [&](std::uint64_t w) { atoms += w; }, missing);
  }
  const double total = static_cast<double>(values.size() + atoms);
  double hi = lo + 1.0;
  double offset = 0.0;
  if (!values.empty()) {
    auto at = [&](double q) {
      // Percentile of the pilot sample, with atoms at 0 sorting first.
      const double rank = q * total - static_cast<double>(atoms);
      if (rank < 0.0) return 0.0;
      auto k = std::min(values.size() - 1, static_cast<std::size_t>(rank));
      std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
      return values[k];
    };
    const double top = at(0.99999);
    const double median = at(0.5);
    if (std::isfinite(top) && top > lo) hi = top;
    offset = std::max(median - lo, 1e-3 * (hi - lo));
  }
  if (!(hi > lo)) hi = lo + 1.0;
  if (!(offset > 0.0) || !std::isfinite(offset)) offset = 1e-3 * (hi - lo);
  return Grid(lo, hi, offset, config.histogram_bins);
}

}  // namespace

LargestPoreDistribution sample_largest(const TailFit& fit, VolumeOfInterest voi,
                                       const McConfig& config) {
  config.validate();
  fit.params.validate();
  const Model model = make_model(fit, voi.mm3(), config);

  double lo = fit.params.threshold;
  if (!fit.empirical_below.empty()) lo = std::min(lo, fit.empirical_below.front());
  const Grid grid = config.range ? Grid(config.range->lower, config.range->upper,
                                        config.range->offset, config.histogram_bins)
                                 : pilot_grid(model, config, lo);

  const BlockShape shape{config.n_param_samples, config.n_p_samples};
  const unsigned workers = resolve_workers(config.workers);
  std::vector<Accumulator> acc(std::min<std::size_t>(workers, config.n_count_samples));
  for (auto& a : acc) a.counts.assign(grid.bins, 0);
  std::vector<double> block_sum(config.n_count_samples, 0.0);

  parallel_blocks(config.n_count_samples, workers, [&](std::size_t i, unsigned w) {
    Accumulator& a = acc[w];
    Rng rng = make_rng(config.seed, streams::kCountBlock, i);
    double sum = 0.0;
    run_block(
        model, shape, rng,
        [&](double v, std::uint64_t weight) {
          sum += v * static_cast<double>(weight);
          if (v < grid.lo) {
            a.underflow += weight;
            return;
          }
          const std::size_t k = grid.index(v);
          if (k == grid.bins) {
            a.overflow += weight;
          } else {
            a.counts[k] += weight;
          }
        },
        [&](std::uint64_t weight) { a.no_pore += weight; }, a.missing_record);
    block_sum[i] = sum;
  });

  Accumulator total;
  total.counts.assign(grid.bins, 0);
  for (const auto& a : acc) {
    for (std::size_t k = 0; k < grid.bins; ++k) total.counts[k] += a.counts[k];
    total.no_pore += a.no_pore;
    total.underflow += a.underflow;
    total.overflow += a.overflow;
    total.missing_record += a.missing_record;
  }
  std::uint64_t n = total.no_pore + total.underflow + total.overflow;
  for (auto c : total.counts) n += c;
  double sum = 0.0;
  for (double s : block_sum) sum += s;

  LargestPoreDistribution dist(grid.edges(), std::move(total.counts), total.no_pore,
                               total.underflow, total.overflow, sum / static_cast<double>(n));
  dist.provenance = Provenance{fit.id, voi.mm3(), config};
  dist.provenance.config.range = HistogramRange{grid.lo, grid.hi, grid.offset};
  if (total.missing_record > 0) {
    dist.warnings.push_back(fmt::format(
        "{} draws had no exceedances but the sub-threshold record is empty; counted as no pores",
        total.missing_record));
  }
  return dist;
}

std::vector<VolumeSummary> volume_sweep(const TailFit& fit, std::span<const double> volumes_mm3,
                                        const McConfig& config) {
  if (volumes_mm3.empty()) throw DomainError("volume_sweep: no volumes given");
  for (std::size_t i = 0; i < volumes_mm3.size(); ++i) {
    VolumeOfInterest check(volumes_mm3[i]);
    if (i > 0 && !(volumes_mm3[i] > volumes_mm3[i - 1])) {
      throw DomainError("volume_sweep: volumes must be strictly ascending");
    }
  }
  std::vector<VolumeSummary> out;
  out.reserve(volumes_mm3.size());
  for (double v : volumes_mm3) {
    out.push_back({v, sample_largest(fit, VolumeOfInterest(v), config).summary()});
  }
  return out;
}

}  // namespace porestat
