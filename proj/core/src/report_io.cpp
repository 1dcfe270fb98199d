#include "porestat/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "porestat/error.hpp"
#include "text_util.hpp"

namespace porestat {

namespace pt = boost::property_tree;

namespace {

std::string opt_number(const std::optional<double>& v) {
  return v ? fmt::format("{}", *v) : std::string();
}

class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    const auto child = root.get_child_optional(name_);
    if (!child) throw IngestError(fmt::format("fit report: missing section [{}]", name_));
    tree_ = &*child;
  }

  std::string text(const std::string& key) const {
    const auto v = tree_->get_optional<std::string>(key);
    if (!v) throw IngestError(fmt::format("fit report: missing key '{}' in [{}]", key, name_), 0, key);
    return std::string(detail::trim(*v));
  }

  std::optional<std::string> maybe_text(const std::string& key) const {
    const auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return std::string(detail::trim(*v));
  }

  double number(const std::string& key) const {
    const auto s = text(key);
    const auto v = detail::parse_double(s);
    if (!v) bad(key, s);
    return *v;
  }

  std::size_t count(const std::string& key) const {
    const double v = number(key);
    if (!(v >= 0.0) || v != std::floor(v)) bad(key, text(key));
    return static_cast<std::size_t>(v);
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    const auto s = text(key);
    if (s.empty()) return out;
    for (const auto& cell : detail::split_csv(s)) {
      const auto v = detail::parse_double(cell);
      if (!v) bad(key, cell);
      out.push_back(*v);
    }
    return out;
  }

 private:
  [[noreturn]] void bad(const std::string& key, const std::string& value) const {
    throw IngestError(fmt::format("fit report: [{}] {} = '{}' is not a valid value", name_, key, value),
                      0, key);
  }

  std::string name_;
  const pt::ptree* tree_ = nullptr;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(fmt::format("cannot open '{}'", path));
  return in;
}

}  // namespace

std::string_view toolkit_version() noexcept { return PORESTAT_VERSION; }

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_echo(const Provenance& p) {
  const McConfig& c = p.config;
  std::string s;
  s += fmt::format("fit_id={}\n", p.fit_id);
  s += fmt::format("volume_mm3={}\n", p.volume_mm3);
  s += fmt::format("seed={}\n", c.seed);
  s += fmt::format("mode={}\n", to_string(c.mode));
  s += fmt::format("n_count_samples={}\n", c.n_count_samples);
  s += fmt::format("n_param_samples={}\n", c.n_param_samples);
  s += fmt::format("n_p_samples={}\n", c.n_p_samples);
  s += fmt::format("histogram_bins={}\n", c.histogram_bins);
  if (c.pinned_count) s += fmt::format("pinned_count={}\n", *c.pinned_count);
  if (c.range) {
    s += fmt::format("range_lower_um={}\n", c.range->lower);
    s += fmt::format("range_upper_um={}\n", c.range->upper);
    s += fmt::format("range_offset_um={}\n", c.range->offset);
  }
  return s;
}

std::string config_hash(const Provenance& provenance) {
  return fmt::format("{:016x}", fnv1a(config_echo(provenance)));
}

void write_fit_report(std::ostream& out, const TailFit& fit, std::string_view threshold_mode) {
  out << "; porestat tail-fit report\n";
  out << fmt::format("; porestat_version={}\n", toolkit_version());
  out << "[tail_fit]\n";
  out << fmt::format("id = {}\n", fit.id);
  out << fmt::format("estimator = {}\n", to_string(fit.estimator));
  if (!threshold_mode.empty()) out << fmt::format("threshold_mode = {}\n", threshold_mode);
  out << fmt::format("threshold_um = {}\n", fit.params.threshold);
  out << fmt::format("scale_um = {}\n", fit.params.scale);
  out << fmt::format("shape = {}\n", fit.params.shape);
  out << fmt::format("n_exceed = {}\n", fit.n_exceed);
  std::string flags;
  for (FitFlag f : fit.flags) {
    if (!flags.empty()) flags += ',';
    flags += to_string(f);
  }
  out << fmt::format("flags = {}\n", flags);

  out << "[covariance]\n";
  out << fmt::format("available = {}\n", fit.covariance ? "true" : "false");
  if (fit.covariance) {
    const auto& c = *fit.covariance;
    out << fmt::format("scale_scale = {}\n", c.scale_scale);
    out << fmt::format("scale_shape = {}\n", c.scale_shape);
    out << fmt::format("shape_shape = {}\n", c.shape_shape);
    out << fmt::format("se_scale_um = {}\n", c.se_scale());
    out << fmt::format("se_shape = {}\n", c.se_shape());
  }

  out << "[rates]\n";
  out << fmt::format("scanned_volume_mm3 = {}\n", fit.scanned_volume_mm3);
  out << fmt::format("lambda_above_per_mm3 = {}\n", fit.lambda_above);
  out << fmt::format("lambda_above_var = {}\n", fit.lambda_above_var);
  out << fmt::format("lambda_below_per_mm3 = {}\n", fit.lambda_below);
  out << fmt::format("lambda_below_var = {}\n", fit.lambda_below_var);

  out << "[empirical_below]\n";
  out << fmt::format("count = {}\n", fit.empirical_below.size());
  out << fmt::format("sizes_um = {}\n", fmt::join(fit.empirical_below, ","));
}

TailFit read_fit_report(std::istream& in) {
  pt::ptree root;
  try {
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw IngestError(fmt::format("fit report: {}", e.message()), e.line());
  }
  TailFit fit;
  const Section head(root, "tail_fit");
  fit.id = head.text("id");
  const auto est = estimator_from_string(head.text("estimator"));
  if (!est) throw IngestError("fit report: unknown estimator '" + head.text("estimator") + "'", 0, "estimator");
  fit.estimator = *est;
  fit.params.threshold = head.number("threshold_um");
  fit.params.scale = head.number("scale_um");
  fit.params.shape = head.number("shape");
  fit.n_exceed = head.count("n_exceed");
  const auto flags = head.maybe_text("flags").value_or("");
  if (!flags.empty()) {
    for (const auto& name : detail::split_csv(flags)) {
      const auto f = fit_flag_from_string(name);
      if (!f) throw IngestError("fit report: unknown flag '" + name + "'", 0, "flags");
      fit.flags.push_back(*f);
    }
  }
  try {
    fit.params.validate();
  } catch (const DomainError& e) {
    throw IngestError(fmt::format("fit report: {}", e.what()));
  }

  const Section cov(root, "covariance");
  const auto available = cov.text("available");
  if (available == "true") {
    fit.covariance = Covariance2{cov.number("scale_scale"), cov.number("scale_shape"),
                                 cov.number("shape_shape")};
  } else if (available != "false") {
    throw IngestError("fit report: [covariance] available must be true or false", 0, "available");
  }

  const Section rates(root, "rates");
  fit.scanned_volume_mm3 = rates.number("scanned_volume_mm3");
  fit.lambda_above = rates.number("lambda_above_per_mm3");
  fit.lambda_above_var = rates.number("lambda_above_var");
  fit.lambda_below = rates.number("lambda_below_per_mm3");
  fit.lambda_below_var = rates.number("lambda_below_var");
  if (fit.lambda_above < 0.0 || fit.lambda_below < 0.0 || fit.lambda_above_var < 0.0 ||
      fit.lambda_below_var < 0.0) {
    throw IngestError("fit report: rates and their variances must be non-negative");
  }

  const Section below(root, "empirical_below");
  fit.empirical_below = below.numbers("sizes_um");
  if (fit.empirical_below.size() != below.count("count")) {
    throw IngestError("fit report: [empirical_below] count does not match the listed sizes", 0, "count");
  }
  if (!std::is_sorted(fit.empirical_below.begin(), fit.empirical_below.end())) {
    throw IngestError("fit report: [empirical_below] sizes must be ascending", 0, "sizes_um");
  }
  return fit;
}

TailFit read_fit_report_file(const std::string& path) {
  auto in = open_input(path);
  return read_fit_report(in);
}

void write_scan_table(std::ostream& out, const ThresholdScan& scan) {
  if (scan.selected) {
    out << fmt::format("# selected_threshold_um={}\n", *scan.selected);
    out << fmt::format("# selection_mode={}\n", scan.mode == SelectionMode::Auto ? "auto" : "manual");
  }
  for (const auto& w : scan.warnings) out << "# warning: " << w << '\n';
  out << "threshold_um,n_exceed,mean_excess_um,sigma_hat_um,xi_hat,sigma_star_um,stability_score,passes\n";
  for (const auto& c : scan.candidates) {
    if (c.usable) {
      out << fmt::format("{},{},{},{},{},{},{},{}\n", c.threshold, c.n_exceed, c.mean_excess, c.scale,
                         c.shape, c.sigma_star, opt_number(c.stability_score), c.passes ? 1 : 0);
    } else {
      out << fmt::format("{},{},{},,,,,0\n", c.threshold, c.n_exceed, c.mean_excess);
    }
  }
}

void write_qq_table(std::ostream& out, std::span<const QqPoint> points) {
  out << "theoretical_um,sample_um\n";
  for (const auto& q : points) out << fmt::format("{},{}\n", q.theoretical, q.sample);
}

void write_provenance(std::ostream& out, const Provenance& provenance) {
  out << fmt::format("# porestat_version={}\n", toolkit_version());
  out << fmt::format("# config_hash={}\n", config_hash(provenance));
  std::istringstream echo(config_echo(provenance));
  for (std::string line; std::getline(echo, line);) out << "# " << line << '\n';
}

void write_distribution(std::ostream& out, const LargestPoreDistribution& dist) {
  write_provenance(out, dist.provenance);
  out << fmt::format("# mean_um={}\n", dist.mean());
  out << fmt::format("# no_pore_mass={}\n", dist.no_pore_mass());
  out << fmt::format("# underflow_mass={}\n", dist.underflow_mass());
  out << fmt::format("# overflow_mass={}\n", dist.overflow_mass());
  for (const auto& w : dist.warnings) out << "# warning: " << w << '\n';
  out << "edge_um,cdf\n";
  const auto edges = dist.edges();
  const auto cdf = dist.cdf_at_edges();
  for (std::size_t k = 0; k < edges.size(); ++k) out << fmt::format("{},{}\n", edges[k], cdf[k]);
}

LargestPoreDistribution read_distribution(std::istream& in) {
  std::map<std::string, std::string> meta;
  std::vector<double> edges;
  std::vector<double> cdf;
  bool header = false;
  std::size_t row = 0;
  for (std::string line; std::getline(in, line);) {
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (auto kv = detail::split_key_value(t.substr(1))) meta[kv->first] = kv->second;
      continue;
    }
    if (!header) {
      const auto cols = detail::split_csv(t);
      if (cols.size() != 2 || cols[0] != "edge_um" || cols[1] != "cdf") {
        throw IngestError("distribution: expected header 'edge_um,cdf'");
      }
      header = true;
      continue;
    }
    ++row;
    const auto cells = detail::split_csv(t);
    if (cells.size() != 2) throw IngestError("distribution: expected two columns", row);
    const auto e = detail::parse_double(cells[0]);
    if (!e) throw IngestError("distribution: bad edge value", row, "edge_um");
    const auto c = detail::parse_double(cells[1]);
    if (!c || *c < 0.0 || *c > 1.0 + 1e-12) throw IngestError("distribution: bad cdf value", row, "cdf");
    if (!edges.empty() && !(*e > edges.back())) {
      throw IngestError("distribution: edges must be strictly ascending", row, "edge_um");
    }
    if (!cdf.empty() && *c < cdf.back()) throw IngestError("distribution: cdf decreases", row, "cdf");
    edges.push_back(*e);
    cdf.push_back(*c);
  }
  if (!header) throw IngestError("distribution: no rows");
  if (edges.size() < 2) throw IngestError("distribution: needs at least two edges");

  auto number = [&](const std::string& key, std::optional<double> fallback) -> double {
    const auto it = meta.find(key);
    if (it == meta.end()) {
      if (fallback) return *fallback;
      throw IngestError("distribution: missing '# " + key + "=' line", 0, key);
    }
    const auto v = detail::parse_double(it->second);
    if (!v) throw IngestError("distribution: bad value for " + key, 0, key);
    return *v;
  };
  const double no_pore = number("no_pore_mass", 0.0);
  const double underflow = number("underflow_mass", std::max(0.0, cdf.front() - no_pore));
  const double overflow = number("overflow_mass", std::max(0.0, 1.0 - cdf.back()));
  std::vector<double> masses(edges.size() - 1);
  for (std::size_t k = 0; k + 1 < cdf.size(); ++k) masses[k] = cdf[k + 1] - cdf[k];
  std::optional<double> mean;
  if (meta.count("mean_um")) mean = number("mean_um", std::nullopt);

  auto dist = LargestPoreDistribution::from_masses(std::move(edges), std::move(masses), no_pore,
                                                   overflow, mean, underflow);
  if (meta.count("fit_id")) dist.provenance.fit_id = meta["fit_id"];
  dist.provenance.volume_mm3 = number("volume_mm3", 0.0);
  if (meta.count("seed")) dist.provenance.config.seed = static_cast<std::uint64_t>(number("seed", 0.0));
  if (meta.count("mode")) {
    if (auto m = uncertainty_mode_from_string(meta["mode"])) dist.provenance.config.mode = *m;
  }
  return dist;
}

LargestPoreDistribution read_distribution_file(const std::string& path) {
  auto in = open_input(path);
  return read_distribution(in);
}

void write_summary(std::ostream& out, const LargestPoreDistribution& dist) {
  write_provenance(out, dist.provenance);
  const auto s = dist.summary();
  out << "volume_mm3,mean_um,p2_5_um,p50_um,p97_5_um,no_pore_mass\n";
  out << fmt::format("{},{},{},{},{},{}\n", dist.provenance.volume_mm3, s.mean, s.p2_5, s.p50, s.p97_5,
                     s.no_pore_mass);
}

namespace {

// Provenance for a multi-volume table: the volume line lists every volume.
void write_multi_volume_provenance(std::ostream& out, const Provenance& provenance,
                                   const std::vector<double>& volumes) {
  Provenance p = provenance;
  p.volume_mm3 = 0.0;
  const std::string listed = fmt::format("volumes_mm3={}", fmt::join(volumes, ";"));
  out << fmt::format("# porestat_version={}\n", toolkit_version());
  out << fmt::format("# config_hash={:016x}\n", fnv1a(config_echo(p) + listed));
  std::istringstream echo(config_echo(p));
  for (std::string line; std::getline(echo, line);) {
    if (line.rfind("volume_mm3=", 0) == 0) line = listed;
    out << "# " << line << '\n';
  }
}

}  // namespace

void write_sweep_table(std::ostream& out, std::span<const VolumeSummary> rows,
                       const Provenance& provenance) {
  std::vector<double> volumes;
  for (const auto& r : rows) volumes.push_back(r.volume_mm3);
  write_multi_volume_provenance(out, provenance, volumes);
  out << "volume_mm3,mean_um,p2_5_um,p50_um,p97_5_um,no_pore_mass\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << fmt::format("{},{},{},{},{},{}\n", r.volume_mm3, s.mean, s.p2_5, s.p50, s.p97_5,
                       s.no_pore_mass);
  }
}

void write_equivalence_table(std::ostream& out, std::span<const EquivalenceReport> reports) {
  out << "coupon_fit_id,part_specimen_id,volume_mm3,observed_largest_um,p_value,q_value,"
         "upper_p_value,beyond_histogram,cartesian_distance_mm,radial_distance_mm\n";
  for (const auto& r : reports) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.coupon_fit_id, r.part_specimen_id,
                       r.volume_mm3, r.observed_largest_um, r.p_value, r.q_value, r.upper_p_value,
                       r.beyond_histogram ? 1 : 0, opt_number(r.cartesian_distance_mm),
                       opt_number(r.radial_distance_mm));
  }
}

void write_scatter_table(std::ostream& out, const ScatterTable& table) {
  for (const auto& w : table.warnings) out << "# warning: " << w << '\n';
  out << "pair_id,cartesian_distance_mm,radial_distance_mm,p_value,q_value\n";
  for (const auto& r : table.rows) {
    out << fmt::format("{},{},{},{},{}\n", r.pair_id, r.cartesian_distance_mm, r.radial_distance_mm,
                       r.p_value, r.q_value);
  }
}

void write_ks_matrix(std::ostream& out, std::span<const ModeKsRow> rows, const Provenance& provenance) {
  Provenance p = provenance;
  p.config.mode = UncertaintyMode::All;
  std::vector<double> volumes;
  for (const auto& r : rows) volumes.push_back(r.volume_mm3);
  write_multi_volume_provenance(out, p, volumes);
  out << "volume_mm3,none_vs_poisson_only,none_vs_all,poisson_only_vs_all\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{}\n", r.volume_mm3, r.none_vs_poisson_only, r.none_vs_all,
                       r.poisson_only_vs_all);
  }
}

}  // namespace porestat
