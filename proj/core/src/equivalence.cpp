#include "porestat/equivalence.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "porestat/error.hpp"

namespace porestat {

double StepCdf::operator()(double x) const {
  auto it = std::upper_bound(points.begin(), points.end(), x);
  if (it == points.begin()) return 0.0;
  return values[static_cast<std::size_t>(it - points.begin()) - 1];
}

StepCdf empirical_cdf(std::span<const double> samples) {
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  StepCdf out;
  const double n = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    // Last index of a run of ties carries the cumulative count.
    if (i + 1 < s.size() && s[i + 1] == s[i]) continue;
    out.points.push_back(s[i]);
    out.values.push_back(static_cast<double>(i + 1) / n);
  }
  return out;
}

StepCdf to_step_cdf(const LargestPoreDistribution& dist) {
  StepCdf out;
  const auto edges = dist.edges();
  const auto cdf = dist.cdf_at_edges();
  if (dist.no_pore_mass() > 0.0 && edges.front() > 0.0) {
    out.points.push_back(0.0);
    out.values.push_back(dist.no_pore_mass());
  }
  out.points.insert(out.points.end(), edges.begin(), edges.end());
  out.values.insert(out.values.end(), cdf.begin(), cdf.end());
  return out;
}

double ks_statistic(const StepCdf& a, const StepCdf& b) {
  // The difference of two right-continuous step functions is constant between
  // merged jump points, so checking at each jump point is exhaustive.
  double sup = 0.0;
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0;
  while (i < a.points.size() || j < b.points.size()) {
    const double xa = i < a.points.size() ? a.points[i] : INFINITY;
    const double xb = j < b.points.size() ? b.points[j] : INFINITY;
    const double x = std::min(xa, xb);
    while (i < a.points.size() && a.points[i] <= x) fa = a.values[i++];
    while (j < b.points.size() && b.points[j] <= x) fb = b.values[j++];
    sup = std::max(sup, std::abs(fa - fb));
  }
  return sup;
}

double ks_uniform_statistic(std::span<const double> samples) {
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double u = std::clamp(s[i], 0.0, 1.0);
    const double k = static_cast<double>(i);
    d = std::max({d, (k + 1.0) / n - u, u - k / n});
  }
  return d;
}

double kolmogorov_p_value(double d, std::size_t n) {
  if (n == 0) throw DomainError("kolmogorov_p_value: empty sample");
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double q_value(const LargestPoreDistribution& dist, double observed) {
  return dist.cdf(observed);
}

bool beyond_histogram(const LargestPoreDistribution& dist, double observed) {
  return observed > dist.upper() && dist.overflow_mass() > 0.0;
}

double p_value(const LargestPoreDistribution& dist, double observed) {
  const double mean = dist.mean();
  if (!std::isfinite(mean)) throw DomainError("p_value: distribution mean is not finite");
  if (dist.no_pore_mass() >= 1.0) return observed == 0.0 ? 1.0 : 0.0;

  const double r = std::abs(observed - mean);
  // Relative slack so that atoms exactly at distance r count.
  const double slack = 1e-12 * std::max({std::abs(mean), std::abs(observed), dist.upper()});
  if (r <= slack) return 1.0;
  auto far = [&](double x) { return std::abs(x - mean) >= r - slack; };

  double p = 0.0;
  if (far(0.0)) p += dist.no_pore_mass();
  if (far(0.5 * dist.lower())) p += dist.underflow_mass();
  const auto edges = dist.edges();
  const auto masses = dist.masses();
  for (std::size_t k = 0; k < masses.size(); ++k) {
    if (far(0.5 * (edges[k] + edges[k + 1]))) p += masses[k];
  }
  // Overflow lies somewhere above the upper edge, at an unresolved distance;
  // it is always counted as far.
  p += dist.overflow_mass();
  return std::clamp(p, 0.0, 1.0);
}

double upper_p_value(const LargestPoreDistribution& dist, double observed) {
  return 1.0 - q_value(dist, observed);
}

EquivalenceReport compare_observed(const LargestPoreDistribution& dist, double observed_um,
                                   std::string part_specimen_id) {
  if (!std::isfinite(observed_um) || observed_um < 0.0) {
    throw DomainError(fmt::format("observed largest pore must be finite and ≥ 0, got {}", observed_um));
  }
  EquivalenceReport r;
  r.coupon_fit_id = dist.provenance.fit_id;
  r.part_specimen_id = std::move(part_specimen_id);
  r.observed_largest_um = observed_um;
  r.q_value = q_value(dist, observed_um);
  r.p_value = p_value(dist, observed_um);
  r.upper_p_value = upper_p_value(dist, observed_um);
  r.volume_mm3 = dist.provenance.volume_mm3;
  r.beyond_histogram = beyond_histogram(dist, observed_um);
  return r;
}

double cartesian_distance(const PlatePosition& a, const PlatePosition& b) noexcept {
  return std::hypot(a.x_mm - b.x_mm, a.y_mm - b.y_mm);
}

double radial_distance(const PlatePosition& a, const PlatePosition& b,
                       const PlatePosition& centre) noexcept {
  const double ra = std::hypot(a.x_mm - centre.x_mm, a.y_mm - centre.y_mm);
  const double rb = std::hypot(b.x_mm - centre.x_mm, b.y_mm - centre.y_mm);
  return std::abs(ra - rb);
}

ScatterTable location_scatter(std::span<const EquivalenceReport> reports,
                              const std::map<std::string, PlatePosition>& positions,
                              const PlatePosition& plate_centre) {
  ScatterTable table;
  for (const auto& r : reports) {
    const auto coupon = positions.find(r.coupon_fit_id);
    const auto part = positions.find(r.part_specimen_id);
    if (coupon == positions.end() || part == positions.end()) {
      table.warnings.push_back(fmt::format("pair {}/{}: plate position missing; row skipped",
                                           r.coupon_fit_id, r.part_specimen_id));
      continue;
    }
    table.rows.push_back({r.coupon_fit_id + "/" + r.part_specimen_id,
                          cartesian_distance(coupon->second, part->second),
                          radial_distance(part->second, coupon->second, plate_centre), r.p_value,
                          r.q_value});
  }
  return table;
}

std::vector<ModeKsRow> ks_mode_matrix(const TailFit& fit, std::span<const double> volumes_mm3,
                                      const McConfig& config) {
  if (volumes_mm3.empty()) throw DomainError("ks_mode_matrix: no volumes given");
  std::vector<ModeKsRow> rows;
  for (double v : volumes_mm3) {
    const VolumeOfInterest voi(v);
    McConfig c = config;
    c.mode = UncertaintyMode::All;
    const auto all = sample_largest(fit, voi, c);
    c.range = all.provenance.config.range;
    c.mode = UncertaintyMode::PoissonOnly;
    const auto poisson = sample_largest(fit, voi, c);
    c.mode = UncertaintyMode::None;
    const auto none = sample_largest(fit, voi, c);

    const StepCdf f_all = to_step_cdf(all);
    const StepCdf f_poisson = to_step_cdf(poisson);
    const StepCdf f_none = to_step_cdf(none);
    rows.push_back({v, ks_statistic(f_none, f_poisson), ks_statistic(f_none, f_all),
                    ks_statistic(f_poisson, f_all)});
  }
  return rows;
}

}  // namespace porestat
