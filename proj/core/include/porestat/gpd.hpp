#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace porestat {

// Below this |ξ| the exponential-limit formulas are used.
inline constexpr double kShapeSwitch = 1e-9;

// Generalized Pareto Distribution for sizes above a threshold µ.
// Support is [µ, ∞) for ξ ≥ 0 and [µ, µ − σ/ξ] for ξ < 0.
struct GpdParams {
  double threshold = 0.0;  // µ, µm
  double scale = 1.0;      // σ, µm, > 0
  double shape = 0.0;      // ξ

  void validate() const;
  double upper_bound() const noexcept;  // +inf for ξ ≥ 0
};

/// 1 − (1 + ξ(d−µ)/σ)^(−1/ξ). Returns 0 below µ and 1 beyond the upper
/// support bound.
double gpd_cdf(const GpdParams& params, double d);

/// Inverse of gpd_cdf for q ∈ [0, 1). q = 1 is accepted only for ξ < 0
/// (returns the support bound).
double gpd_quantile(const GpdParams& params, double q);

// GPD log-likelihood of excesses x_i = d_i − µ (all > 0). Returns -inf
// outside the support or for σ ≤ 0.
double gpd_log_likelihood(std::span<const double> excesses, double scale, double shape);

// Symmetric 2×2 covariance over (σ, ξ).
struct Covariance2 {
  double scale_scale = 0.0;
  double scale_shape = 0.0;
  double shape_shape = 0.0;

  double se_scale() const;
  double se_shape() const;
  bool positive_semidefinite() const noexcept;
};

/// Asymptotic MLE covariance ((1+ξ)/n)·[[2σ², σ], [σ, 1+ξ]].
Covariance2 mle_covariance(double scale, double shape, std::size_t n);

/// Asymptotic method-of-moments covariance; nullopt at the prefactor poles
/// ξ ∈ {1/4, 1/3, 1/2} and wherever the matrix stops being a covariance.
std::optional<Covariance2> mom_covariance(double scale, double shape, std::size_t n);

enum class Estimator { Mle, Mom };

std::string_view to_string(Estimator e) noexcept;
std::optional<Estimator> estimator_from_string(std::string_view s) noexcept;

enum class FitFlag {
  OutsideMleDomain,      // ξ̂ ≤ −0.5
  OutsideMomDomain,      // ξ̂ ≥ 0.25
  NoEstimatorInDomain,   // neither estimator inside its normality domain
  CovarianceUnavailable,
  MleAtShapeBoundary,    // likelihood maximum at ξ = −1
  NoExceedances,         // rate estimate above threshold is zero
};

std::string_view to_string(FitFlag f) noexcept;
std::optional<FitFlag> fit_flag_from_string(std::string_view s) noexcept;

struct TailFit {
  std::string id;
  GpdParams params;
  std::optional<Covariance2> covariance;
  Estimator estimator = Estimator::Mle;
  std::size_t n_exceed = 0;

  // Poisson rates per mm³. Variances use rate/count, the estimator variance
  // the uncertainty model is built on.
  double lambda_above = 0.0;
  double lambda_above_var = 0.0;
  double lambda_below = 0.0;
  double lambda_below_var = 0.0;
  double scanned_volume_mm3 = 0.0;

  // Sub-threshold sizes, ascending; feeds the N = 0 fallback.
  std::vector<double> empirical_below;

  std::vector<FitFlag> flags;

  bool has_flag(FitFlag f) const noexcept;
  void add_flag(FitFlag f);
};

struct FitOptions {
  std::size_t min_tail_count = 30;
};

/// Maximum-likelihood fit to sizes above `threshold`. Covariance is attached
/// only when ξ̂ > −0.5. Throws FitError on too few points, zero variance or
/// optimizer failure.
TailFit fit_mle(std::span<const double> exceedances, double threshold,
                const FitOptions& options = {});

/// Moment-matching fit: ξ̂ = ½(1 − x̄²/s²), σ̂ = ½x̄(1 + x̄²/s²). Covariance is
/// attached only when ξ̂ < 0.25.
TailFit fit_mom(std::span<const double> exceedances, double threshold,
                const FitOptions& options = {});

/// The selection rule on already computed fits (either may be missing after
/// a failure): MLE when ξ̂_MLE > −0.5, else MOM when ξ̂_MOM < 0.25, else the
/// MLE fit (MOM if there is none) flagged NoEstimatorInDomain.
TailFit choose_estimator(std::optional<TailFit> mle, std::optional<TailFit> mom);

/// Fits and applies choose_estimator; MOM is only computed when needed.
TailFit select_estimator(std::span<const double> exceedances, double threshold,
                         const FitOptions& options = {});

struct QqPoint {
  double theoretical = 0.0;
  double sample = 0.0;
};

/// i-th order statistic (ascending) against the fitted quantile at (i − ½)/n.
std::vector<QqPoint> qq_points(const TailFit& fit, std::span<const double> exceedances);

}  // namespace porestat
