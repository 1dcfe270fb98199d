#pragma once

// Reference formulas and samplers written directly from the model equations,
// without calling into the library, so tests compare two independent
// computations.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline double gpd_cdf(double d, double mu, double sigma, double xi) {
  if (d <= mu) return 0.0;
  const double z = (d - mu) / sigma;
  if (xi == 0.0) return 1.0 - std::exp(-z);
  const double base = 1.0 + xi * z;
  if (base <= 0.0) return 1.0;
  return 1.0 - std::pow(base, -1.0 / xi);
}

inline double gpd_quantile(double q, double mu, double sigma, double xi) {
  if (xi == 0.0) return mu - sigma * std::log(1.0 - q);
  return mu + sigma / xi * (std::pow(1.0 - q, -xi) - 1.0);
}

// Exact GPD sample above mu from a plain mt19937_64.
inline std::vector<double> gpd_sample(std::size_t n, double mu, double sigma, double xi,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double d = gpd_quantile(u(rng), mu, sigma, xi);
    if (d > mu) out.push_back(d);
  }
  return out;
}

struct Cov {
  double ss, sx, xx;
};

// Asymptotic MLE covariance of (σ̂, ξ̂).
inline Cov mle_cov(double sigma, double xi, double n) {
  const double f = (1.0 + xi) / n;
  return {f * 2.0 * sigma * sigma, f * sigma, f * (1.0 + xi)};
}

// Asymptotic moment-estimator covariance of (σ̂, ξ̂).
inline Cov mom_cov(double sigma, double xi, double n) {
  const double f = (1.0 - xi) * (1.0 - xi) / (n * (1.0 - 3.0 * xi) * (1.0 - 4.0 * xi));
  const double ss = 2.0 * sigma * sigma * (1.0 - 6.0 * xi + 12.0 * xi * xi) / (1.0 - 2.0 * xi);
  const double sx = sigma * (1.0 - 4.0 * xi + 12.0 * xi * xi);
  const double xx = (1.0 - 2.0 * xi) * (1.0 - xi + 6.0 * xi * xi);
  return {f * ss, f * sx, f * xx};
}

// Largest of N i.i.d. GPD sizes.
inline double largest_cdf(double d, double mu, double sigma, double xi, double n) {
  return std::pow(gpd_cdf(d, mu, sigma, xi), n);
}

}  // namespace oracle
