#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "porestat/equivalence.hpp"
#include "porestat/error.hpp"
#include "porestat/largest_pore.hpp"
#include "porestat/synthetic.hpp"

using namespace porestat;

namespace {

PoreRecord sphere(std::string id, double d) {
  const double v = std::numbers::pi * d * d * d / 6.0;
  return make_pore(std::move(id), v, std::numbers::pi * d * d, d, d);
}

// `above` pores of 30 µm and `below` pores of 10 µm in `volume` mm³.
SpecimenDataset two_sizes(std::size_t above, std::size_t below, double volume) {
  std::vector<PoreRecord> pores;
  for (std::size_t i = 0; i < above; ++i) pores.push_back(sphere("a" + std::to_string(i), 30.0));
  for (std::size_t i = 0; i < below; ++i) pores.push_back(sphere("b" + std::to_string(i), 10.0));
  SpecimenMetadata m;
  m.specimen_id = "two";
  m.scanned_volume_mm3 = volume;
  return SpecimenDataset(m, std::move(pores));
}

TailFit point_fit(GpdParams p, double lambda_above, double lambda_above_var = 0.0) {
  TailFit f;
  f.id = "f";
  f.params = p;
  f.lambda_above = lambda_above;
  f.lambda_above_var = lambda_above_var;
  return f;
}

McConfig small_config(UncertaintyMode mode, std::uint64_t seed = 11) {
  McConfig c;
  c.n_count_samples = 200;
  c.n_param_samples = 50;
  c.n_p_samples = 200;
  c.histogram_bins = 2048;
  c.seed = seed;
  c.mode = mode;
  return c;
}

double total_mass(const LargestPoreDistribution& d) {
  double s = d.no_pore_mass() + d.underflow_mass() + d.overflow_mass();
  for (double m : d.masses()) s += m;
  return s;
}

}  // namespace

TEST(LargestCdfClosed, SinglePoreIsGpd) {
  const GpdParams p{2.0, 1.5, 0.3};
  for (double d : {2.5, 4.0, 11.0}) {
    EXPECT_NEAR(largest_cdf_closed(p, 1, d), oracle::gpd_cdf(d, 2.0, 1.5, 0.3), 1e-14);
  }
}

TEST(LargestCdfClosed, WorkedValue) {
  // F(1) = 1 − 1.5^(−2) = 5/9 for µ=0, σ=1, ξ=0.5.
  const double f = 1.0 - 1.0 / 2.25;
  EXPECT_NEAR(largest_cdf_closed({0.0, 1.0, 0.5}, 2, 1.0), f * f, 1e-14);
  EXPECT_NEAR(largest_cdf_closed({0.0, 1.0, 0.5}, 2, 1.0), 0.3087, 1e-4);
}

TEST(LargestCdfClosed, MonotoneInCountAndSize) {
  const GpdParams p{0.0, 1.0, -0.2};
  for (double d : {0.1, 1.0, 3.0}) {
    for (std::uint64_t n = 1; n < 200; n += 7) {
      EXPECT_LE(largest_cdf_closed(p, n + 1, d), largest_cdf_closed(p, n, d));
    }
  }
  double prev = 0.0;
  for (double d = 0.0; d < 6.0; d += 0.01) {
    const double f = largest_cdf_closed(p, 10, d);
    EXPECT_GE(f, prev);
    prev = f;
  }
  EXPECT_EQ(largest_cdf_closed(p, 10, 5.0), 1.0);  // bound µ − σ/ξ = 5
}

TEST(LargestCdfClosed, ZeroPoresRejected) {
  EXPECT_THROW(largest_cdf_closed({0.0, 1.0, 0.0}, 0, 1.0), DomainError);
  EXPECT_THROW(largest_quantile_closed({0.0, 1.0, 0.0}, 0, 0.5), DomainError);
}

TEST(LargestQuantileClosed, Identities) {
  EXPECT_NEAR(largest_quantile_closed({0.0, 1.0, 1.0}, 1, 0.5), 1.0, 1e-14);
  EXPECT_EQ(largest_quantile_closed({3.0, 1.0, 0.2}, 7, 0.0), 3.0);
  EXPECT_THROW(largest_quantile_closed({0.0, 1.0, 0.0}, 3, 1.0), DomainError);
  EXPECT_NEAR(largest_quantile_closed({0.0, 2.0, -0.5}, 3, 1.0), 4.0, 1e-14);
}

TEST(LargestQuantileClosed, RoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  std::uniform_int_distribution<std::uint64_t> count(1, 100000);
  for (const GpdParams p : {GpdParams{5.0, 2.0, 0.4}, GpdParams{0.0, 1.0, 0.0},
                            GpdParams{1.0, 0.5, -0.3}}) {
    for (int i = 0; i < 100; ++i) {
      const double q = u(rng);
      const auto n = count(rng);
      const double d = largest_quantile_closed(p, n, q);
      EXPECT_NEAR(largest_cdf_closed(p, n, d), q, 1e-10) << n << " " << q;
    }
  }
}

TEST(LargestQuantileClosed, DoublingCountActsOnProbability) {
  const GpdParams p{1.0, 2.0, 0.1};
  const double a = largest_quantile_closed(p, 400, 0.5);
  const double b = largest_quantile_closed(p, 200, std::sqrt(0.5));
  EXPECT_NEAR(a, b, 1e-10 * a);
  EXPECT_GT(a, largest_quantile_closed(p, 200, 0.5));
}

TEST(Rates, WorkedValue) {
  const auto ds = two_sizes(200, 50, 100.0);
  const auto r = estimate_rates(ds, 20.0);
  EXPECT_DOUBLE_EQ(r.above.rate, 2.0);
  EXPECT_DOUBLE_EQ(r.above.variance, 0.01);
  EXPECT_DOUBLE_EQ(r.below.rate, 0.5);
  EXPECT_EQ(r.above.rate + r.below.rate, 250.0 / 100.0);
}

TEST(Rates, NoExceedancesFlagged) {
  const auto ds = two_sizes(0, 50, 10.0);
  const auto r = estimate_rates(ds, 20.0);
  EXPECT_EQ(r.above.rate, 0.0);
  EXPECT_TRUE(r.above.empty());
}

TEST(Rates, ConservationOnSynthetic) {
  GroundTruth t;
  t.bulk = {std::log(8.0), 0.4};
  t.tail = {15.0, 3.0, 0.1};
  t.lambda_above = 3.0;
  t.lambda_below = 17.0;
  t.specimen_volume_mm3 = 37.0;
  const auto ds = generate_specimen(t, 5);
  for (double mu : {5.0, 15.0, 25.0}) {
    const auto r = estimate_rates(ds, mu);
    EXPECT_NEAR(r.above.rate + r.below.rate, static_cast<double>(ds.size()) / 37.0, 1e-12);
  }
}

TEST(FitSpecimen, AttachesRatesAndRecord) {
  GroundTruth t;
  t.bulk = {std::log(8.0), 0.4};
  t.tail = {15.0, 3.0, 0.1};
  t.lambda_above = 20.0;
  t.lambda_below = 30.0;
  t.specimen_volume_mm3 = 50.0;
  const auto ds = generate_specimen(t, 8, "spec8");
  const auto fit = fit_specimen(ds, 15.0);
  EXPECT_EQ(fit.id, "spec8");
  EXPECT_EQ(fit.n_exceed, ds.count_above(15.0));
  EXPECT_EQ(fit.empirical_below.size(), ds.size() - fit.n_exceed);
  EXPECT_TRUE(std::is_sorted(fit.empirical_below.begin(), fit.empirical_below.end()));
  EXPECT_LE(fit.empirical_below.back(), 15.0);
  EXPECT_DOUBLE_EQ(fit.scanned_volume_mm3, 50.0);
  EXPECT_TRUE(fit.covariance.has_value());
  EXPECT_EQ(fit_specimen(ds, 15.0, {}, Estimator::Mom).estimator, Estimator::Mom);
}

TEST(VolumeOfInterest, MustBePositive) {
  EXPECT_THROW(VolumeOfInterest(0.0), DomainError);
  EXPECT_THROW(VolumeOfInterest(-3.0), DomainError);
  EXPECT_THROW(VolumeOfInterest(std::nan("")), DomainError);
}

TEST(SampleLargest, ModeNoneMatchesClosedForm) {
  const GpdParams p{10.0, 2.0, 0.2};
  auto cfg = small_config(UncertaintyMode::None);
  cfg.n_count_samples = 1000;
  cfg.n_p_samples = 1000;
  cfg.pinned_count = 40;
  const auto dist = sample_largest(point_fit(p, 1.0), VolumeOfInterest(5.0), cfg);
  const auto closed = [&](double d) { return largest_cdf_closed(p, 40, d); };
  const double ks = ks_statistic(to_step_cdf(dist), sample_on_grid(closed, dist.edges()));
  EXPECT_LE(ks, 0.01);
  EXPECT_NEAR(total_mass(dist), 1.0, 1e-6);
}

TEST(SampleLargest, ModeNonePinsExpectedCount) {
  const GpdParams p{0.0, 1.0, 0.0};
  auto cfg = small_config(UncertaintyMode::None);
  const auto dist = sample_largest(point_fit(p, 2.0), VolumeOfInterest(12.3), cfg);  // N = 25
  const double med = dist.percentile(0.5);
  EXPECT_NEAR(largest_cdf_closed(p, 25, med), 0.5, 0.01);
}

TEST(SampleLargest, PoissonCountMatchesMarginal) {
  // Known rate, known parameters: CDF exp(−λV(1 − F(d))) with the N = 0 atom
  // at D = 0 when there is no sub-threshold record.
  const GpdParams p{5.0, 1.0, 0.1};
  const double lambda = 0.4, v = 5.0;
  auto cfg = small_config(UncertaintyMode::PoissonOnly);
  cfg.n_count_samples = 20000;
  cfg.n_p_samples = 50;
  const auto dist = sample_largest(point_fit(p, lambda), VolumeOfInterest(v), cfg);
  EXPECT_NEAR(dist.no_pore_mass(), std::exp(-lambda * v), 0.01);
  const auto closed = [&](double d) { return poisson_largest_cdf(p, lambda, v, d); };
  std::vector<double> grid = {0.0};
  grid.insert(grid.end(), dist.edges().begin(), dist.edges().end());
  EXPECT_LE(ks_statistic(to_step_cdf(dist), sample_on_grid(closed, grid)), 0.02);
}

TEST(SampleLargest, ModeAllMatchesBruteForce) {
  TailFit fit = point_fit({10.0, 2.0, 0.1}, 2.0, 2.0 / 200.0);
  fit.covariance = mle_covariance(2.0, 0.1, 200);
  fit.lambda_below = 5.0;
  fit.empirical_below = {3.0, 4.0, 6.0, 9.0};
  const VolumeOfInterest voi(10.0);
  auto cfg = small_config(UncertaintyMode::All);
  // Count draws dominate the noise, so the count axis gets most of the budget.
  cfg.n_count_samples = 5000;
  cfg.n_param_samples = 10;
  cfg.n_p_samples = 20;
  const auto dist = sample_largest(fit, voi, cfg);
  const auto brute = brute_force_largest(fit, voi, 200000, 77);
  const auto emp = empirical_cdf(brute);
  EXPECT_LE(ks_statistic(to_step_cdf(dist), sample_on_grid(emp, dist.edges())), 0.01);
}

TEST(SampleLargest, PointMassWithoutAnyPores) {
  TailFit fit = point_fit({10.0, 2.0, 0.1}, 0.0);
  for (auto mode : {UncertaintyMode::None, UncertaintyMode::PoissonOnly}) {
    const auto dist = sample_largest(fit, VolumeOfInterest(1.0), small_config(mode));
    EXPECT_EQ(dist.no_pore_mass(), 1.0);
    EXPECT_EQ(dist.percentile(0.5), 0.0);
    EXPECT_EQ(dist.mean(), 0.0);
  }
}

TEST(SampleLargest, EmptyRecordWithBelowRateWarns) {
  TailFit fit = point_fit({10.0, 2.0, 0.1}, 0.0);
  fit.lambda_below = 3.0;
  const auto dist = sample_largest(fit, VolumeOfInterest(1.0), small_config(UncertaintyMode::PoissonOnly));
  EXPECT_EQ(dist.no_pore_mass(), 1.0);
  EXPECT_FALSE(dist.warnings.empty());
}

TEST(SampleLargest, FallbackUsesSubThresholdRecord) {
  // No exceedances: the largest of M ~ Poisson(λ_b V) record draws. With one
  // distinct size every non-empty draw lands on it.
  TailFit fit = point_fit({10.0, 2.0, 0.1}, 0.0);
  fit.lambda_below = 1.0;
  fit.empirical_below = {4.0, 4.0, 4.0};
  const auto dist = sample_largest(fit, VolumeOfInterest(2.0), small_config(UncertaintyMode::PoissonOnly));
  EXPECT_NEAR(dist.no_pore_mass(), std::exp(-2.0), 0.01);
  EXPECT_NEAR(dist.mean(), 4.0 * (1.0 - std::exp(-2.0)), 0.05);
  EXPECT_EQ(dist.overflow_mass(), 0.0);
}

TEST(SampleLargest, RefusesModeAllWithoutCovariance) {
  const TailFit fit = point_fit({10.0, 2.0, 0.1}, 1.0, 0.01);
  EXPECT_THROW(sample_largest(fit, VolumeOfInterest(1.0), small_config(UncertaintyMode::All)),
               RefusalError);
  EXPECT_NO_THROW(sample_largest(fit, VolumeOfInterest(1.0), small_config(UncertaintyMode::None)));
}

TEST(SampleLargest, IdenticalAcrossWorkerCounts) {
  TailFit fit = point_fit({10.0, 2.0, 0.1}, 2.0, 0.02);
  fit.covariance = mle_covariance(2.0, 0.1, 100);
  auto cfg = small_config(UncertaintyMode::All, 99);
  cfg.workers = 1;
  const auto a = sample_largest(fit, VolumeOfInterest(3.0), cfg);
  cfg.workers = 3;
  const auto b = sample_largest(fit, VolumeOfInterest(3.0), cfg);
  ASSERT_EQ(a.counts().size(), b.counts().size());
  EXPECT_TRUE(std::equal(a.counts().begin(), a.counts().end(), b.counts().begin()));
  EXPECT_EQ(a.mean(), b.mean());
  EXPECT_EQ(a.no_pore_mass(), b.no_pore_mass());
  EXPECT_EQ(a.overflow_mass(), b.overflow_mass());
  EXPECT_TRUE(std::equal(a.edges().begin(), a.edges().end(), b.edges().begin()));
  cfg.seed = 100;
  const auto c = sample_largest(fit, VolumeOfInterest(3.0), cfg);
  EXPECT_NE(a.mean(), c.mean());
}

TEST(SampleLargest, InvariantsHold) {
  TailFit fit = point_fit({10.0, 2.0, 0.3}, 0.5, 0.005);
  fit.covariance = mle_covariance(2.0, 0.3, 100);
  fit.lambda_below = 2.0;
  fit.empirical_below = {1.0, 2.0, 5.0, 8.0};
  const auto dist = sample_largest(fit, VolumeOfInterest(2.0), small_config(UncertaintyMode::All));
  EXPECT_NEAR(total_mass(dist), 1.0, 1e-6);
  EXPECT_NEAR(dist.cdf_at_edges().back() + dist.overflow_mass(), 1.0, 1e-6);
  for (std::size_t k = 1; k < dist.cdf_at_edges().size(); ++k) {
    EXPECT_GE(dist.cdf_at_edges()[k], dist.cdf_at_edges()[k - 1]);
  }
  const auto s = dist.summary();
  EXPECT_LE(s.p2_5, s.p50);
  EXPECT_LE(s.p50, s.p97_5);
  EXPECT_EQ(dist.provenance.fit_id, "f");
  EXPECT_EQ(dist.provenance.volume_mm3, 2.0);
  EXPECT_TRUE(dist.provenance.config.range.has_value());
}

TEST(SampleLargest, PinnedRangeIsUsed) {
  auto cfg = small_config(UncertaintyMode::None);
  cfg.range = HistogramRange{10.0, 40.0, 0.0};
  cfg.histogram_bins = 30;
  const auto dist = sample_largest(point_fit({10.0, 2.0, 0.1}, 2.0), VolumeOfInterest(5.0), cfg);
  ASSERT_EQ(dist.edges().size(), 31u);
  EXPECT_DOUBLE_EQ(dist.edges()[1], 11.0);
  EXPECT_EQ(dist.upper(), 40.0);
}

TEST(SampleLargest, ConfigValidation) {
  auto cfg = small_config(UncertaintyMode::None);
  cfg.histogram_bins = 4;
  EXPECT_THROW(sample_largest(point_fit({0, 1, 0}, 1.0), VolumeOfInterest(1.0), cfg), DomainError);
  cfg = small_config(UncertaintyMode::None);
  cfg.n_p_samples = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = small_config(UncertaintyMode::None);
  cfg.range = HistogramRange{5.0, 5.0, 0.0};
  EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(VolumeSweep, NegativeShapeBoundedAndNondecreasing) {
  TailFit fit = point_fit({10.0, 2.0, -0.25}, 1.0, 0.01);
  fit.covariance = mle_covariance(2.0, -0.25, 100);
  const double bound = 10.0 + 2.0 / 0.25;
  auto cfg = small_config(UncertaintyMode::PoissonOnly);
  const std::vector<double> volumes = {5, 10, 20, 40, 80};
  const auto rows = volume_sweep(fit, volumes, cfg);
  ASSERT_EQ(rows.size(), volumes.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].summary.p97_5, bound + 1e-9);
    EXPECT_LE(rows[i].summary.mean, bound);
    // Stochastic tolerance of about one histogram bin.
    if (i > 0) EXPECT_GE(rows[i].summary.p97_5, rows[i - 1].summary.p97_5 - 0.02);
  }
}

TEST(VolumeSweep, RejectsBadVolumeLists) {
  const auto fit = point_fit({10.0, 2.0, 0.1}, 1.0);
  const auto cfg = small_config(UncertaintyMode::None);
  EXPECT_THROW(volume_sweep(fit, std::vector<double>{}, cfg), DomainError);
  EXPECT_THROW(volume_sweep(fit, std::vector<double>{2.0, 1.0}, cfg), DomainError);
  EXPECT_THROW(volume_sweep(fit, std::vector<double>{-1.0, 1.0}, cfg), DomainError);
}

TEST(Distribution, FromMassesPercentiles) {
  const auto d = LargestPoreDistribution::from_masses({0.0, 1.0, 2.0, 3.0, 4.0},
                                                      {0.25, 0.25, 0.25, 0.25}, 0.0);
  EXPECT_DOUBLE_EQ(d.percentile(0.5), 2.0);
  EXPECT_DOUBLE_EQ(d.cdf(1.5), 0.375);
  EXPECT_DOUBLE_EQ(d.mean(), 2.0);
  EXPECT_THROW(d.percentile(1.5), DomainError);
}
