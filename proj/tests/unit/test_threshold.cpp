#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "porestat/error.hpp"
#include "porestat/synthetic.hpp"
#include "porestat/threshold.hpp"

using namespace porestat;

namespace {

std::vector<double> grid_from(double start, double step, int count) {
  std::vector<double> g;
  for (int k = 0; k < count; ++k) g.push_back(start + step * k);
  return g;
}

ThresholdCandidate scored(double t, double score, std::size_t n = 100) {
  ThresholdCandidate c;
  c.threshold = t;
  c.n_exceed = n;
  c.usable = true;
  c.stability_score = score;
  return c;
}

}  // namespace

TEST(MeanExcess, Arithmetic) {
  const std::vector<double> d = {1, 2, 3};
  const std::vector<double> c = {0.5};
  const auto scan = mean_excess_curve(d, c);
  ASSERT_EQ(scan.candidates.size(), 1u);
  EXPECT_DOUBLE_EQ(scan.candidates[0].mean_excess, 1.5);
  EXPECT_EQ(scan.candidates[0].n_exceed, 3u);
}

TEST(MeanExcess, CandidatesAtOrAboveMaximumExcluded) {
  const std::vector<double> d = {1, 2, 3};
  const std::vector<double> c = {0.5, 2.5, 3.0, 7.0};
  const auto scan = mean_excess_curve(d, c);
  ASSERT_EQ(scan.candidates.size(), 1u);
  EXPECT_EQ(scan.warnings.size(), 3u);
}

TEST(MeanExcess, ExponentialDataIsFlatAtScale) {
  const auto x = oracle::gpd_sample(20000, 0.0, 1.0, 0.0, 17);
  const auto scan = mean_excess_curve(x, grid_from(0.0, 0.5, 4));
  for (const auto& c : scan.candidates) {
    // Sample sd of an exponential excess equals its mean.
    EXPECT_NEAR(c.mean_excess, 1.0, 3.0 / std::sqrt(static_cast<double>(c.n_exceed)));
  }
}

TEST(MeanExcess, SlopeTracksShape) {
  // At ξ = 0.5 the excesses have infinite variance, so a single sample's slope
  // scatters widely; the median over replications is what converges.
  std::vector<double> slopes;
  for (std::uint64_t seed = 1; seed <= 51; ++seed) {
    const auto x = oracle::gpd_sample(10000, 0.0, 1.0, 0.5, 500 + seed);
    slopes.push_back(mean_excess_slope(mean_excess_curve(x, default_candidate_grid(x))));
  }
  std::nth_element(slopes.begin(), slopes.begin() + 25, slopes.end());
  EXPECT_NEAR(slopes[25], 1.0, 0.1);
}

TEST(MeanExcess, NonincreasingCounts) {
  const auto x = oracle::gpd_sample(500, 1.0, 1.0, 0.2, 4);
  const auto scan = mean_excess_curve(x, default_candidate_grid(x));
  for (std::size_t k = 1; k < scan.candidates.size(); ++k) {
    EXPECT_LT(scan.candidates[k].n_exceed, scan.candidates[k - 1].n_exceed);
    EXPECT_GT(scan.candidates[k].threshold, scan.candidates[k - 1].threshold);
  }
}

TEST(TheoreticalMeanExcess, FormulaAndDomain) {
  EXPECT_DOUBLE_EQ(theoretical_mean_excess(1.0, 0.0, 5.0), 1.0);
  EXPECT_DOUBLE_EQ(theoretical_mean_excess(1.0, 0.5, 2.0), 4.0);
  EXPECT_THROW(theoretical_mean_excess(1.0, 1.0, 0.0), DomainError);
  EXPECT_THROW(theoretical_mean_excess(1.0, 1.5, 0.0), DomainError);
}

TEST(CandidateGrid, QuantilesDeduplicated) {
  std::vector<double> x;
  for (int i = 1; i <= 101; ++i) x.push_back(i);
  const auto g = default_candidate_grid(x);
  ASSERT_EQ(g.size(), 50u);
  EXPECT_DOUBLE_EQ(g.front(), 51.0);
  EXPECT_DOUBLE_EQ(g.back(), 100.0);
  const std::vector<double> same(40, 2.0);
  EXPECT_EQ(default_candidate_grid(same).size(), 1u);
}

TEST(StabilityScan, ModifiedScaleArithmetic) {
  // σ̂(µ) = 2, ξ̂ = 0.25 at µ = 4 gives σ* = 1.
  const double sigma = 2.0, xi = 0.25, mu = 4.0;
  EXPECT_DOUBLE_EQ(sigma - xi * mu, 1.0);
  const auto x = oracle::gpd_sample(2000, 0.0, 1.0, 0.1, 6);
  const auto scan = stability_scan(x, grid_from(0.0, 0.1, 5));
  for (const auto& c : scan.candidates) {
    EXPECT_DOUBLE_EQ(c.sigma_star, c.scale - c.shape * c.threshold);
  }
}

TEST(StabilityScan, SmallCandidatesDropped) {
  const auto x = oracle::gpd_sample(100, 0.0, 1.0, 0.1, 6);
  const auto scan = stability_scan(x, default_candidate_grid(x));
  for (const auto& c : scan.candidates) EXPECT_GE(c.n_exceed, 30u);
  EXPECT_FALSE(scan.warnings.empty());
}

TEST(StabilityScan, ExactGpdParametersConstant) {
  // Above µ₀ an exact GPD keeps ξ and σ* = σ₀ − ξµ₀ fixed; each candidate's
  // estimate should sit within 2 standard errors about 95% of the time.
  // Candidates from one dataset are strongly correlated, so coverage is pooled
  // over many datasets with few candidates each. The σ* interval uses the
  // inverse Fisher information, whose σ–ξ covariance is −σ(1+ξ)/n.
  const double mu0 = 10.0, sigma0 = 2.0, xi = 0.1;
  const double sigma_star = sigma0 - xi * mu0;
  int shape_in = 0, star_in = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    const auto x = oracle::gpd_sample(5000, mu0, sigma0, xi, 40 + seed);
    const auto scan = stability_scan(x, grid_from(mu0, 1.0, 3));
    for (const auto& c : scan.candidates) {
      ASSERT_TRUE(c.usable);
      ++total;
      shape_in += std::abs(c.shape - xi) <= 2.0 * c.se_shape;
      const double n = static_cast<double>(c.n_exceed);
      const double sigma_mu = sigma0 + xi * (c.threshold - mu0);
      const double f = (1.0 + xi) / n;
      const double var = f * (2.0 * sigma_mu * sigma_mu + c.threshold * c.threshold * (1.0 + xi) +
                              2.0 * c.threshold * sigma_mu);
      star_in += std::abs(c.sigma_star - sigma_star) <= 2.0 * std::sqrt(var);
    }
  }
  EXPECT_EQ(total, 240);
  EXPECT_GE(shape_in, total * 88 / 100) << shape_in;
  EXPECT_GE(star_in, total * 88 / 100) << star_in;
}

TEST(StabilityScan, SigmaStarErrorIsDeltaMethod) {
  const auto x = oracle::gpd_sample(3000, 5.0, 1.5, 0.2, 9);
  const auto scan = stability_scan(x, grid_from(5.0, 0.5, 3));
  for (const auto& c : scan.candidates) {
    const auto cov = oracle::mle_cov(c.scale, c.shape, static_cast<double>(c.n_exceed));
    const double mu = c.threshold;
    EXPECT_NEAR(c.se_sigma_star, std::sqrt(cov.ss + mu * mu * cov.xx - 2.0 * mu * cov.sx), 1e-12);
    EXPECT_NEAR(c.se_shape, std::sqrt(cov.xx), 1e-12);
  }
}

TEST(StabilityScan, MixturePassesOnlyPastCrossover) {
  // Lognormal bulk truncated at 20 µm under a GPD tail starting at 20 µm.
  GroundTruth truth;
  truth.bulk = {std::log(30.0), 0.3};
  truth.tail = {20.0, 4.0, 0.1};
  truth.lambda_above = 20.0;
  truth.lambda_below = 100.0;
  truth.specimen_volume_mm3 = 100.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto ds = generate_specimen(truth, seed);
    auto scan = stability_scan(ds, grid_from(12.0, 0.25, 73));
    bool any_above = false;
    for (const auto& c : scan.candidates) {
      if (c.threshold < truth.tail.threshold) {
        EXPECT_FALSE(c.passes) << "seed " << seed << " candidate " << c.threshold;
      } else {
        any_above = any_above || c.passes;
      }
    }
    EXPECT_TRUE(any_above);
    EXPECT_GE(select_threshold(scan, SelectionMode::Auto), truth.tail.threshold);
  }
}

TEST(SelectThreshold, SmallestPassingCandidate) {
  ThresholdScan scan;
  scan.candidates = {scored(1, 2.0), scored(2, 0.9), scored(3, 0.4), scored(4, 0.1)};
  EXPECT_DOUBLE_EQ(select_threshold(scan, SelectionMode::Auto), 3.0);
  EXPECT_EQ(scan.selected, 3.0);
  EXPECT_EQ(scan.mode, SelectionMode::Auto);
}

TEST(SelectThreshold, ManualVerbatim) {
  ThresholdScan scan;
  scan.candidates = {scored(1, 9.0)};
  EXPECT_DOUBLE_EQ(select_threshold(scan, SelectionMode::Manual, 20.0), 20.0);
  EXPECT_EQ(scan.mode, SelectionMode::Manual);
  EXPECT_THROW(select_threshold(scan, SelectionMode::Manual), DomainError);
}

TEST(SelectThreshold, NothingPassesListsNearMisses) {
  ThresholdScan scan;
  scan.candidates = {scored(1, 2.0), scored(2, 0.9), scored(3, 1.4), scored(4, 3.0)};
  try {
    select_threshold(scan, SelectionMode::Auto);
    FAIL();
  } catch (const ThresholdError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("µ = 2"), std::string::npos);
    EXPECT_NE(msg.find("µ = 3"), std::string::npos);
    EXPECT_NE(msg.find("µ = 1"), std::string::npos);
    EXPECT_EQ(msg.find("µ = 4"), std::string::npos);
  }
}

TEST(SelectThreshold, ExactGpdSelectsNearTrueThreshold) {
  // The windowed rule is a stochastic decision; measure how often it lands
  // within one grid step of the true threshold.
  const double mu0 = 10.0, step = 0.05;
  int near = 0;
  const int reps = 20;
  for (int seed = 1; seed <= reps; ++seed) {
    const auto x = oracle::gpd_sample(5000, mu0, 2.0, 0.1, 1000 + seed);
    auto scan = stability_scan(x, grid_from(mu0, step, 40));
    try {
      near += select_threshold(scan, SelectionMode::Auto) <= mu0 + step + 1e-12 ? 1 : 0;
    } catch (const ThresholdError&) {
    }
  }
  EXPECT_GE(near, reps * 6 / 10);
}

TEST(SelectThreshold, Deterministic) {
  const auto x = oracle::gpd_sample(3000, 0.0, 1.0, 0.2, 5);
  auto a = stability_scan(x, default_candidate_grid(x));
  auto b = stability_scan(x, default_candidate_grid(x));
  double ta = NAN, tb = NAN;
  try {
    ta = select_threshold(a, SelectionMode::Auto);
    tb = select_threshold(b, SelectionMode::Auto);
    EXPECT_EQ(ta, tb);
  } catch (const ThresholdError&) {
    EXPECT_THROW(select_threshold(b, SelectionMode::Auto), ThresholdError);
  }
}
