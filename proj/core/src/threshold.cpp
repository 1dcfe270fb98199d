#include "porestat/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>

#include "porestat/error.hpp"

namespace porestat {

namespace {

std::vector<double> sorted_descending(std::span<const double> sizes) {
  std::vector<double> v(sizes.begin(), sizes.end());
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

// Prefix of a descending vector holding values strictly above t.
std::span<const double> above(const std::vector<double>& desc, double t) {
  auto it = std::partition_point(desc.begin(), desc.end(), [t](double d) { return d > t; });
  return {desc.data(), static_cast<std::size_t>(it - desc.begin())};
}

ThresholdScan mean_excess_sorted(const std::vector<double>& desc,
                                 std::span<const double> candidates) {
  std::vector<double> grid(candidates.begin(), candidates.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  ThresholdScan scan;
  const double largest = desc.empty() ? -INFINITY : desc.front();
  for (double t : grid) {
    if (t >= largest) {
      scan.warnings.push_back(
          fmt::format("candidate {} is not below the largest size {}; excluded", t, largest));
      continue;
    }
    const auto ex = above(desc, t);
    if (ex.size() < 2) {
      scan.warnings.push_back(
          fmt::format("candidate {} keeps {} exceedance(s); excluded", t, ex.size()));
      continue;
    }
    double sum = 0.0;
    for (double d : ex) sum += d - t;
    ThresholdCandidate c;
    c.threshold = t;
    c.n_exceed = ex.size();
    c.mean_excess = sum / static_cast<double>(ex.size());
    scan.candidates.push_back(c);
  }
  return scan;
}

}  // namespace

std::vector<double> default_candidate_grid(std::span<const double> sizes) {
  std::vector<double> v(sizes.begin(), sizes.end());
  std::sort(v.begin(), v.end());
  std::vector<double> grid;
  if (v.empty()) return grid;
  const double last = static_cast<double>(v.size() - 1);
  for (int pct = 50; pct <= 99; ++pct) {
    // Linear interpolation between order statistics.
    const double h = last * pct / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    grid.push_back(v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]));
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double theoretical_mean_excess(double scale, double shape, double threshold) {
  if (!(shape < 1.0)) {
    throw DomainError(fmt::format(
        "mean excess is undefined for shape {} (the tail mean is infinite for ξ ≥ 1)", shape));
  }
  return scale / (1.0 - shape) + shape / (1.0 - shape) * threshold;
}

ThresholdScan mean_excess_curve(std::span<const double> sizes, std::span<const double> candidates) {
  return mean_excess_sorted(sorted_descending(sizes), candidates);
}

ThresholdScan mean_excess_curve(const SpecimenDataset& dataset, std::span<const double> candidates) {
  return mean_excess_curve(dataset.diameters(), candidates);
}

ThresholdScan stability_scan(std::span<const double> sizes, std::span<const double> candidates,
                             const ScanOptions& options) {
  const auto desc = sorted_descending(sizes);
  ThresholdScan scan = mean_excess_sorted(desc, candidates);

  std::erase_if(scan.candidates, [&](const ThresholdCandidate& c) {
    if (c.n_exceed >= options.min_tail_count) return false;
    scan.warnings.push_back(fmt::format("candidate {} keeps {} exceedances (< {}); excluded",
                                        c.threshold, c.n_exceed, options.min_tail_count));
    return true;
  });

  const FitOptions fit_options{options.min_tail_count};
  for (auto& c : scan.candidates) {
    try {
      const TailFit fit = select_estimator(above(desc, c.threshold), c.threshold, fit_options);
      c.scale = fit.params.scale;
      c.shape = fit.params.shape;
      c.sigma_star = fit.params.scale - fit.params.shape * c.threshold;
      if (fit.covariance && !fit.has_flag(FitFlag::NoEstimatorInDomain)) {
        c.se_scale = fit.covariance->se_scale();
        c.se_shape = fit.covariance->se_shape();
        const auto& v = *fit.covariance;
        const double mu = c.threshold;
        c.se_sigma_star = std::sqrt(
            std::max(v.scale_scale + mu * mu * v.shape_shape - 2.0 * mu * v.scale_shape, 0.0));
        c.usable = c.se_sigma_star > 0.0 && c.se_shape > 0.0;
      }
    } catch (const Error& e) {
      scan.warnings.push_back(fmt::format("candidate {}: fit failed: {}", c.threshold, e.what()));
    }
  }

  auto& cs = scan.candidates;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    if (!cs[k].usable) continue;
    double score = 0.0;
    std::size_t compared = 0;
    for (std::size_t j = k + 1; j < cs.size() && compared < options.window; ++j) {
      if (!cs[j].usable) continue;
      ++compared;
      score = std::max(score, std::abs(cs[j].shape - cs[k].shape) / cs[k].se_shape);
      score = std::max(score, std::abs(cs[j].sigma_star - cs[k].sigma_star) / cs[k].se_sigma_star);
    }
    if (compared == 0) continue;
    cs[k].stability_score = score;
    cs[k].passes = score <= options.tolerance && cs[k].n_exceed >= options.min_tail_count;
  }
  return scan;
}

ThresholdScan stability_scan(const SpecimenDataset& dataset, std::span<const double> candidates,
                             const ScanOptions& options) {
  return stability_scan(dataset.diameters(), candidates, options);
}

double select_threshold(ThresholdScan& scan, SelectionMode mode, std::optional<double> manual_value,
                        const ScanOptions& options) {
  scan.mode = mode;
  if (mode == SelectionMode::Manual) {
    if (!manual_value || !std::isfinite(*manual_value)) {
      throw DomainError("manual threshold selection needs a finite value");
    }
    scan.selected = *manual_value;
    return *manual_value;
  }
  for (const auto& c : scan.candidates) {
    if (c.stability_score && *c.stability_score <= options.tolerance &&
        c.n_exceed >= options.min_tail_count) {
      scan.selected = c.threshold;
      return c.threshold;
    }
  }

  std::vector<const ThresholdCandidate*> scored;
  for (const auto& c : scan.candidates) {
    if (c.stability_score) scored.push_back(&c);
  }
  std::sort(scored.begin(), scored.end(), [](auto* a, auto* b) {
    return *a->stability_score < *b->stability_score;
  });
  std::string near;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, scored.size()); ++i) {
    near += fmt::format("{}µ = {} (score {:.3f}, n = {})", i ? "; " : "", scored[i]->threshold,
                        *scored[i]->stability_score, scored[i]->n_exceed);
  }
  throw ThresholdError(fmt::format(
      "no threshold candidate is stable within {} standard errors ({} candidates scanned){}{}",
      options.tolerance, scan.candidates.size(), near.empty() ? "" : "; closest: ", near));
}

double mean_excess_slope(const ThresholdScan& scan) {
  const auto& cs = scan.candidates;
  if (cs.size() < 2) throw DomainError("mean_excess_slope: need at least two candidates");
  const double n = static_cast<double>(cs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& c : cs) {
    mx += c.threshold;
    my += c.mean_excess;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& c : cs) {
    sxy += (c.threshold - mx) * (c.mean_excess - my);
    sxx += (c.threshold - mx) * (c.threshold - mx);
  }
  return sxy / sxx;
}

}  // namespace porestat
