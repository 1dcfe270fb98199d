// Parameter estimation for the GPD tail.
//
// The MLE maximizes the profile log-likelihood in θ = ξ/σ: for fixed θ the
// likelihood is maximized in closed form by ξ̂(θ) = mean(log1p(θ x_i)),
// σ̂ = ξ̂/θ, leaving a one-dimensional search. The search variable is
// u = θ·max(x) ∈ (−1, ∞); ξ̂(u) is increasing, so the ξ ≥ −1 restriction (the
// likelihood is unbounded below it) is a lower bound on u.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "porestat/error.hpp"
#include "porestat/gpd.hpp"

namespace porestat {

namespace {

struct Sample {
  std::vector<double> excess;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double max = 0.0;
};

Sample prepare(std::span<const double> exceedances, double threshold, const FitOptions& options) {
  if (!std::isfinite(threshold)) throw DomainError("tail fit: threshold must be finite");
  if (exceedances.size() < std::max<std::size_t>(options.min_tail_count, 2)) {
    throw FitError(fmt::format("tail fit: {} exceedances above {} µm, need at least {}",
                               exceedances.size(), threshold,
                               std::max<std::size_t>(options.min_tail_count, 2)));
  }
  Sample s;
  s.excess.reserve(exceedances.size());
  for (double d : exceedances) {
    if (!(d > threshold) || !std::isfinite(d)) {
      throw DomainError(fmt::format("tail fit: value {} is not above threshold {}", d, threshold));
    }
    s.excess.push_back(d - threshold);
  }
  const double n = static_cast<double>(s.excess.size());
  s.mean = std::accumulate(s.excess.begin(), s.excess.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : s.excess) ss += (x - s.mean) * (x - s.mean);
  s.variance = ss / (n - 1.0);
  s.max = *std::max_element(s.excess.begin(), s.excess.end());
  if (!(s.variance > 1e-24 * s.mean * s.mean)) {
    throw FitError("tail fit: exceedances have zero variance");
  }
  return s;
}

TailFit make_fit(double threshold, double scale, double shape, Estimator est, std::size_t n) {
  TailFit fit;
  fit.params = GpdParams{threshold, scale, shape};
  fit.estimator = est;
  fit.n_exceed = n;
  return fit;
}

// Profile log-likelihood in u = θ·max(x).
class Profile {
 public:
  explicit Profile(const Sample& s) : s_(s), n_(static_cast<double>(s.excess.size())) {}

  double shape(double u) const {
    if (u == 0.0) return 0.0;
    const double theta = u / s_.max;
    double sum = 0.0;
    for (double x : s_.excess) sum += std::log1p(theta * x);
    return sum / n_;
  }

  double scale(double u, double shape) const {
    if (u == 0.0) return s_.mean;
    return shape / (u / s_.max);
  }

  double loglik(double u) const {
    const double xi = shape(u);
    const double sigma = scale(u, xi);
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(xi)) {
      return -std::numeric_limits<double>::infinity();
    }
    return -n_ * std::log(sigma) - n_ * (1.0 + xi);
  }

 private:
  const Sample& s_;
  double n_;
};

}  // namespace

TailFit fit_mle(std::span<const double> exceedances, double threshold, const FitOptions& options) {
  const Sample s = prepare(exceedances, threshold, options);
  const Profile profile(s);

  // Lowest admissible u: ξ̂(u) = −1, or as close to the pole as doubles allow.
  double u_lo = -1.0 + 1e-10;
  if (profile.shape(u_lo) < -1.0) {
    auto f = [&](double u) { return profile.shape(u) + 1.0; };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::toms748_solve(f, u_lo, 0.0, f(u_lo), 1.0, tol, iters);
    u_lo = b;  // f(b) ≥ 0 side
    (void)a;
  }
  constexpr double u_hi = 1e6;

  std::vector<double> grid;
  for (double eps : {1e-10, 1e-8, 1e-6, 1e-4, 1e-3}) grid.push_back(-1.0 + eps);
  for (int k = 1; k < 50; ++k) grid.push_back(-1.0 + 0.02 * k);
  for (int e = -8; e <= -3; ++e) grid.push_back(-std::pow(10.0, e));
  grid.push_back(0.0);
  for (int k = -40; k <= 30; ++k) grid.push_back(std::pow(10.0, k / 5.0));
  // Multi-start: moment estimate.
  {
    const double r = s.mean * s.mean / s.variance;
    const double xi_mom = 0.5 * (1.0 - r);
    const double sigma_mom = 0.5 * s.mean * (1.0 + r);
    grid.push_back(xi_mom / sigma_mom * s.max);
  }
  std::erase_if(grid, [&](double u) { return u < u_lo || u > u_hi; });
  grid.push_back(u_lo);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ll = profile.loglik(grid[i]);
    if (ll > best_ll) {
      best_ll = ll;
      best = i;
    }
  }
  if (!std::isfinite(best_ll)) throw FitError("MLE: log-likelihood is not finite on the search grid");

  double u_best = grid[best];
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  if (hi > lo) {
    auto neg = [&](double u) { return -profile.loglik(u); };
    std::uintmax_t iters = 500;
    auto [u, f] = boost::math::tools::brent_find_minima(neg, lo, hi, 40, iters);
    if (std::isfinite(f) && -f >= best_ll) u_best = u;
  }

  const double xi = profile.shape(u_best);
  const double sigma = profile.scale(u_best, xi);
  if (!std::isfinite(xi) || !(sigma > 0.0) || !std::isfinite(sigma)) {
    throw FitError(fmt::format("MLE: optimizer did not converge (u = {}, ξ = {}, σ = {})", u_best,
                               xi, sigma));
  }

  TailFit fit = make_fit(threshold, sigma, xi, Estimator::Mle, s.excess.size());
  if (u_best <= u_lo * (1.0 - 1e-9) || xi <= -1.0 + 1e-9) fit.add_flag(FitFlag::MleAtShapeBoundary);
  if (xi > -0.5) {
    fit.covariance = mle_covariance(sigma, xi, s.excess.size());
  } else {
    fit.add_flag(FitFlag::OutsideMleDomain);
    fit.add_flag(FitFlag::CovarianceUnavailable);
  }
  return fit;
}

TailFit fit_mom(std::span<const double> exceedances, double threshold, const FitOptions& options) {
  const Sample s = prepare(exceedances, threshold, options);
  const double r = s.mean * s.mean / s.variance;
  const double xi = 0.5 * (1.0 - r);
  const double sigma = 0.5 * s.mean * (1.0 + r);

  TailFit fit = make_fit(threshold, sigma, xi, Estimator::Mom, s.excess.size());
  if (xi < 0.25) {
    fit.covariance = mom_covariance(sigma, xi, s.excess.size());
    if (!fit.covariance) fit.add_flag(FitFlag::CovarianceUnavailable);
  } else {
    fit.add_flag(FitFlag::OutsideMomDomain);
    fit.add_flag(FitFlag::CovarianceUnavailable);
  }
  return fit;
}

TailFit choose_estimator(std::optional<TailFit> mle, std::optional<TailFit> mom) {
  if (mle && mle->params.shape > -0.5) return *mle;
  if (mom && mom->params.shape < 0.25) return *mom;
  if (!mle && !mom) throw FitError("no estimator produced a fit");
  TailFit fallback = mle ? *std::move(mle) : *std::move(mom);
  fallback.add_flag(FitFlag::NoEstimatorInDomain);
  return fallback;
}

TailFit select_estimator(std::span<const double> exceedances, double threshold,
                         const FitOptions& options) {
  std::optional<TailFit> mle;
  std::string mle_error;
  try {
    mle = fit_mle(exceedances, threshold, options);
    if (mle->params.shape > -0.5) return *mle;
  } catch (const FitError& e) {
    mle_error = e.what();
  }

  std::optional<TailFit> mom;
  try {
    mom = fit_mom(exceedances, threshold, options);
  } catch (const FitError& e) {
    if (!mle) throw FitError(fmt::format("both estimators failed: {}; {}", mle_error, e.what()));
  }
  return choose_estimator(std::move(mle), std::move(mom));
}

std::vector<QqPoint> qq_points(const TailFit& fit, std::span<const double> exceedances) {
  std::vector<double> sorted(exceedances.begin(), exceedances.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<QqPoint> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    out.push_back({gpd_quantile(fit.params, p), sorted[i]});
  }
  return out;
}

}  // namespace porestat
