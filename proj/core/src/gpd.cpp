#include "porestat/gpd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "porestat/error.hpp"

namespace porestat {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void GpdParams::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError(fmt::format("GPD scale must be positive and finite, got {}", scale));
  }
  if (!std::isfinite(shape) || !std::isfinite(threshold)) {
    throw DomainError("GPD threshold and shape must be finite");
  }
}

double GpdParams::upper_bound() const noexcept {
  if (shape >= -kShapeSwitch) return kInf;
  return threshold - scale / shape;
}

double gpd_cdf(const GpdParams& params, double d) {
  params.validate();
  if (!(d > params.threshold)) return 0.0;
  const double z = (d - params.threshold) / params.scale;
  if (std::abs(params.shape) < kShapeSwitch) return -std::expm1(-z);
  const double arg = params.shape * z;
  if (arg <= -1.0) return 1.0;
  return -std::expm1(-std::log1p(arg) / params.shape);
}

double gpd_quantile(const GpdParams& params, double q) {
  params.validate();
  if (!(q >= 0.0) || q > 1.0) {
    throw DomainError(fmt::format("gpd_quantile: probability must lie in [0, 1), got {}", q));
  }
  if (q == 1.0) {
    if (params.shape >= -kShapeSwitch) {
      throw DomainError("gpd_quantile: q = 1 is unbounded for a non-negative shape");
    }
    return params.upper_bound();
  }
  const double log_survival = std::log1p(-q);
  if (std::abs(params.shape) < kShapeSwitch) return params.threshold - params.scale * log_survival;
  return params.threshold + params.scale / params.shape * std::expm1(-params.shape * log_survival);
}

double gpd_log_likelihood(std::span<const double> excesses, double scale, double shape) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(shape)) return -kInf;
  const double n = static_cast<double>(excesses.size());
  if (std::abs(shape) < kShapeSwitch) {
    double sum = 0.0;
    for (double x : excesses) sum += x;
    return -n * std::log(scale) - sum / scale;
  }
  double sum = 0.0;
  for (double x : excesses) {
    const double arg = shape * x / scale;
    if (arg <= -1.0) return -kInf;
    sum += std::log1p(arg);
  }
  return -n * std::log(scale) - (1.0 + 1.0 / shape) * sum;
}

double Covariance2::se_scale() const { return std::sqrt(std::max(scale_scale, 0.0)); }
double Covariance2::se_shape() const { return std::sqrt(std::max(shape_shape, 0.0)); }

bool Covariance2::positive_semidefinite() const noexcept {
  if (!std::isfinite(scale_scale) || !std::isfinite(scale_shape) || !std::isfinite(shape_shape)) {
    return false;
  }
  const double det = scale_scale * shape_shape - scale_shape * scale_shape;
  const double tol = 1e-12 * std::abs(scale_scale * shape_shape);
  return scale_scale >= 0.0 && shape_shape >= 0.0 && det >= -tol;
}

Covariance2 mle_covariance(double scale, double shape, std::size_t n) {
  if (n == 0) throw DomainError("mle_covariance: sample size must be positive");
  const double k = (1.0 + shape) / static_cast<double>(n);
  return Covariance2{k * 2.0 * scale * scale, k * scale, k * (1.0 + shape)};
}

std::optional<Covariance2> mom_covariance(double scale, double shape, std::size_t n) {
  if (n == 0) throw DomainError("mom_covariance: sample size must be positive");
  constexpr std::array<double, 3> poles = {0.25, 1.0 / 3.0, 0.5};
  for (double p : poles) {
    if (std::abs(shape - p) < 1e-12) return std::nullopt;
  }
  const double xi = shape;
  const double xi2 = xi * xi;
  const double k =
      (1.0 - xi) * (1.0 - xi) / (static_cast<double>(n) * (1.0 - 3.0 * xi) * (1.0 - 4.0 * xi));
  Covariance2 c{
      k * 2.0 * scale * scale * (1.0 - 6.0 * xi + 12.0 * xi2) / (1.0 - 2.0 * xi),
      k * scale * (1.0 - 4.0 * xi + 12.0 * xi2),
      k * (1.0 - 2.0 * xi) * (1.0 - xi + 6.0 * xi2),
  };
  if (!c.positive_semidefinite()) return std::nullopt;
  return c;
}

std::string_view to_string(Estimator e) noexcept {
  return e == Estimator::Mle ? "MLE" : "MOM";
}

std::optional<Estimator> estimator_from_string(std::string_view s) noexcept {
  if (s == "MLE") return Estimator::Mle;
  if (s == "MOM") return Estimator::Mom;
  return std::nullopt;
}

namespace {
constexpr std::array<std::pair<FitFlag, std::string_view>, 6> kFlagNames = {{
    {FitFlag::OutsideMleDomain, "outside_mle_asymptotic_normality_domain"},
    {FitFlag::OutsideMomDomain, "outside_mom_asymptotic_normality_domain"},
    {FitFlag::NoEstimatorInDomain, "no_estimator_in_valid_domain"},
    {FitFlag::CovarianceUnavailable, "covariance_unavailable"},
    {FitFlag::MleAtShapeBoundary, "mle_at_shape_boundary"},
    {FitFlag::NoExceedances, "no_exceedances"},
}};
}  // namespace

std::string_view to_string(FitFlag f) noexcept {
  for (const auto& [flag, name] : kFlagNames) {
    if (flag == f) return name;
  }
  return "unknown";
}

std::optional<FitFlag> fit_flag_from_string(std::string_view s) noexcept {
  for (const auto& [flag, name] : kFlagNames) {
    if (name == s) return flag;
  }
  return std::nullopt;
}

bool TailFit::has_flag(FitFlag f) const noexcept {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

void TailFit::add_flag(FitFlag f) {
  if (!has_flag(f)) flags.push_back(f);
}

}  // namespace porestat
