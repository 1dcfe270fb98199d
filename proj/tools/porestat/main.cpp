// porestat: command-line front end. Commands talk to each other through files
// only; see README.md for the config keys and file formats.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "porestat/equivalence.hpp"
#include "porestat/error.hpp"
#include "porestat/gpd.hpp"
#include "porestat/largest_pore.hpp"
#include "porestat/pore_geometry.hpp"
#include "porestat/report_io.hpp"
#include "porestat/synthetic.hpp"
#include "porestat/threshold.hpp"
#include "settings.hpp"

namespace fs = std::filesystem;
using namespace porestat;
using cli::Settings;
using cli::UsageError;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kStatistics = 3 };

void warn(const std::string& message) { fmt::print(std::cerr, "porestat: warning: {}\n", message); }

std::string existing_file(const std::optional<std::string>& path, const std::string& what) {
  if (!path || path->empty()) throw UsageError(fmt::format("{} is required", what));
  if (!fs::is_regular_file(*path)) throw UsageError(fmt::format("{} '{}' does not exist", what, *path));
  return *path;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

// Writes through `emit` to `path`, or to stdout when path is empty or "-".
template <class Emit>
void write_to(const std::string& path, Emit&& emit) {
  if (path.empty() || path == "-") {
    emit(std::cout);
    std::cout.flush();
  } else {
    auto out = open_output(path);
    emit(out);
  }
}

// --- shared option groups ---------------------------------------------------

struct SpecimenFlags {
  std::optional<std::string> pores, id, geometry;
  std::optional<double> velocity, scanned_volume, build_x, build_y;

  void attach(CLI::App& app) {
    app.add_option("pores,--pores", pores, "Pore table (CSV)");
    app.add_option("--id", id, "Specimen id");
    app.add_option("--geometry", geometry, "Geometry label");
    app.add_option("--scan-velocity", velocity, "Scan velocity, mm/s");
    app.add_option("--scanned-volume", scanned_volume, "Scanned volume, mm³");
    app.add_option("--build-x", build_x, "Build-plate x, mm");
    app.add_option("--build-y", build_y, "Build-plate y, mm");
  }

  SpecimenDataset load(const Settings& s) const {
    const std::string path = existing_file(s.find(pores, "specimen.pores"), "pore table");
    SpecimenMetadata meta;
    meta.specimen_id = s.get(id, "specimen.id", std::string());
    meta.geometry_label = s.get(geometry, "specimen.geometry", std::string());
    meta.scan_velocity_mm_s = s.get(velocity, "specimen.scan_velocity_mm_s", 0.0);
    meta.scanned_volume_mm3 = s.get(scanned_volume, "specimen.scanned_volume_mm3", 0.0);
    const auto x = s.find(build_x, "specimen.build_x_mm");
    const auto y = s.find(build_y, "specimen.build_y_mm");
    if (x.has_value() != y.has_value()) throw UsageError("give both build-plate coordinates or neither");
    if (x) meta.build_location = PlatePosition{*x, *y};
    auto dataset = ingest_specimen_file(path, std::move(meta));
    if (dataset.empty()) throw IngestError(fmt::format("pore table '{}': no rows", path));
    if (const auto n = dataset.sphericity_warnings(); n > 0) {
      warn(fmt::format("{} pores have sphericity above 1 (surface area likely underestimated)", n));
    }
    return dataset;
  }
};

struct McFlags {
  std::optional<std::uint64_t> seed, pinned_count;
  std::optional<std::string> mode;
  std::optional<std::size_t> n_count, n_param, n_p, bins;
  std::optional<unsigned> workers;
  std::optional<double> range_lower, range_upper, range_offset;

  void attach(CLI::App& app) {
    app.add_option("--seed", seed, "Random seed (required)");
    app.add_option("--mode", mode, "Uncertainty mode: none, poisson_only, all");
    app.add_option("--n-count", n_count, "Count samples");
    app.add_option("--n-param", n_param, "(σ, ξ) samples per count sample");
    app.add_option("--n-p", n_p, "Probability samples per count sample");
    app.add_option("--bins", bins, "Histogram bins");
    app.add_option("--workers", workers, "Worker threads (0 = all cores)");
    app.add_option("--pinned-count", pinned_count, "Exceedance count used by mode none");
    app.add_option("--range-lower", range_lower, "Histogram lower edge, µm");
    app.add_option("--range-upper", range_upper, "Histogram upper edge, µm");
    app.add_option("--range-offset", range_offset, "Histogram log-spacing offset, µm (0 = uniform)");
  }

  McConfig config(const Settings& s) const {
    McConfig c;
    const auto sd = s.find(seed, "mc.seed");
    if (!sd) throw UsageError("--seed (or mc.seed) is required for stochastic commands");
    c.seed = *sd;
    const auto m = s.get(mode, "mc.mode", std::string("all"));
    const auto parsed = uncertainty_mode_from_string(m);
    if (!parsed) throw UsageError(fmt::format("unknown uncertainty mode '{}'", m));
    c.mode = *parsed;
    c.n_count_samples = s.get(n_count, "mc.n_count_samples", c.n_count_samples);
    c.n_param_samples = s.get(n_param, "mc.n_param_samples", c.n_param_samples);
    c.n_p_samples = s.get(n_p, "mc.n_p_samples", c.n_p_samples);
    c.histogram_bins = s.get(bins, "mc.histogram_bins", c.histogram_bins);
    c.workers = s.get(workers, "mc.workers", 0u);
    c.pinned_count = s.find(pinned_count, "mc.pinned_count");
    const auto lo = s.find(range_lower, "mc.range_lower_um");
    const auto hi = s.find(range_upper, "mc.range_upper_um");
    if (lo.has_value() != hi.has_value()) throw UsageError("give both histogram range edges or neither");
    if (lo) c.range = HistogramRange{*lo, *hi, s.get(range_offset, "mc.range_offset_um", 0.0)};
    c.validate();
    return c;
  }
};

// --- commands ---------------------------------------------------------------

struct GeomCmd {
  SpecimenFlags specimen;
  std::string out;

  int run(const Settings& s) const {
    const auto dataset = specimen.load(s);
    write_to(out, [&](std::ostream& o) { write_dataset(o, dataset); });
    return kOk;
  }
};

struct FitCmd {
  SpecimenFlags specimen;
  std::optional<double> threshold;
  std::optional<std::string> estimator, grid, out_dir;
  std::optional<std::size_t> min_tail, window;
  std::optional<double> tolerance;

  int run(const Settings& s) const {
    const auto dataset = specimen.load(s);
    ScanOptions scan_opts;
    scan_opts.min_tail_count = s.get(min_tail, "threshold.min_tail_count", scan_opts.min_tail_count);
    scan_opts.window = s.get(window, "threshold.window", scan_opts.window);
    scan_opts.tolerance = s.get(tolerance, "threshold.tolerance", scan_opts.tolerance);

    std::optional<Estimator> forced;
    const auto policy = s.get(estimator, "estimator.policy", std::string("auto"));
    if (policy != "auto") {
      forced = estimator_from_string(policy == "mle" ? "MLE" : policy == "mom" ? "MOM" : policy);
      if (!forced) throw UsageError(fmt::format("unknown estimator policy '{}'", policy));
    }

    std::vector<double> candidates;
    if (const auto g = s.find(grid, "threshold.grid_um")) {
      candidates = cli::parse_number_list(*g, "threshold grid");
      std::sort(candidates.begin(), candidates.end());
    } else {
      candidates = default_candidate_grid(dataset.diameters());
    }

    const auto manual = s.find(threshold, "threshold.value_um");
    const auto mode_name = s.get(std::optional<std::string>{}, "threshold.mode",
                                 std::string(manual ? "manual" : "auto"));
    if (mode_name != "auto" && mode_name != "manual") {
      throw UsageError(fmt::format("threshold mode must be auto or manual, got '{}'", mode_name));
    }
    const bool is_manual = mode_name == "manual" || threshold.has_value();
    if (is_manual && !manual) throw UsageError("manual threshold mode needs --threshold");

    const fs::path dir = s.get(out_dir, "output.dir", std::string("."));
    ThresholdScan scan = stability_scan(dataset, candidates, scan_opts);
    for (const auto& w : scan.warnings) warn(w);
    double mu = 0.0;
    try {
      mu = select_threshold(scan, is_manual ? SelectionMode::Manual : SelectionMode::Auto, manual,
                            scan_opts);
    } catch (const ThresholdError&) {
      auto o = open_output(dir / "scan.csv");
      write_scan_table(o, scan);
      throw;
    }

    const FitOptions fit_opts{scan_opts.min_tail_count};
    const TailFit fit = fit_specimen(dataset, mu, fit_opts, forced);
    for (FitFlag f : fit.flags) warn(fmt::format("fit flag: {}", to_string(f)));
    const auto tail = dataset.diameters().first(fit.n_exceed);

    {
      auto o = open_output(dir / "fit.ini");
      write_fit_report(o, fit, is_manual ? "manual" : "auto");
    }
    {
      auto o = open_output(dir / "scan.csv");
      write_scan_table(o, scan);
    }
    {
      auto o = open_output(dir / "qq.csv");
      write_qq_table(o, qq_points(fit, tail));
    }
    fmt::print("threshold_um={} estimator={} scale_um={} shape={} n_exceed={}\n", mu,
               to_string(fit.estimator), fit.params.scale, fit.params.shape, fit.n_exceed);
    return kOk;
  }
};

struct PredictCmd {
  std::optional<std::string> fit_path, out_dir;
  std::optional<double> volume;
  McFlags mc;

  int run(const Settings& s) const {
    const auto fit = read_fit_report_file(existing_file(s.find(fit_path, "predict.fit"), "fit report"));
    const auto v = s.find(volume, "predict.volume_mm3");
    if (!v) throw UsageError("--volume (or predict.volume_mm3) is required");
    const VolumeOfInterest voi(*v);
    const McConfig config = mc.config(s);
    const auto dist = sample_largest(fit, voi, config);
    for (const auto& w : dist.warnings) warn(w);

    const fs::path dir = s.get(out_dir, "output.dir", std::string("."));
    {
      auto o = open_output(dir / "cdf.csv");
      write_distribution(o, dist);
    }
    {
      auto o = open_output(dir / "summary.csv");
      write_summary(o, dist);
    }
    const auto sum = dist.summary();
    fmt::print("mean_um={} p2_5_um={} p50_um={} p97_5_um={} no_pore_mass={}\n", sum.mean, sum.p2_5,
               sum.p50, sum.p97_5, sum.no_pore_mass);
    return kOk;
  }
};

std::map<std::string, PlatePosition> read_positions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(fmt::format("cannot open '{}'", path));
  std::map<std::string, PlatePosition> out;
  std::string line;
  std::size_t row = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("id,x_mm,y_mm", 0) != 0) throw IngestError("positions: expected header 'id,x_mm,y_mm'");
      header = true;
      continue;
    }
    ++row;
    std::istringstream cells(line);
    std::string id, x, y;
    std::getline(cells, id, ',');
    std::getline(cells, x, ',');
    std::getline(cells, y, ',');
    try {
      out[id] = PlatePosition{std::stod(x), std::stod(y)};
    } catch (const std::exception&) {
      throw IngestError("positions: bad coordinate", row);
    }
  }
  return out;
}

std::vector<std::pair<std::string, double>> read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(fmt::format("cannot open '{}'", path));
  std::vector<std::pair<std::string, double>> out;
  std::string line;
  std::size_t row = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("part_specimen_id,observed_largest_um", 0) != 0) {
        throw IngestError("observations: expected header 'part_specimen_id,observed_largest_um'");
      }
      header = true;
      continue;
    }
    ++row;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IngestError("observations: expected two columns", row);
    try {
      out.emplace_back(line.substr(0, comma), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw IngestError("observations: bad observed size", row, "observed_largest_um");
    }
  }
  if (out.empty()) throw IngestError(fmt::format("observations '{}': no rows", path));
  return out;
}

struct CompareCmd {
  std::optional<std::string> dist_path, part_id, observations, positions, out, scatter;
  std::optional<double> observed;
  std::optional<double> x_min, x_max, y_min, y_max;

  int run(const Settings& s) const {
    const auto dist = read_distribution_file(
        existing_file(s.find(dist_path, "compare.distribution"), "distribution"));
    std::vector<std::pair<std::string, double>> obs;
    if (const auto table = s.find(observations, "compare.observations")) {
      obs = read_observations(existing_file(table, "observation table"));
    }
    if (const auto d = s.find(observed, "compare.observed_um")) {
      obs.emplace_back(s.get(part_id, "compare.part_id", std::string("part")), *d);
    }
    if (obs.empty()) throw UsageError("give --observed or --observations");

    std::vector<EquivalenceReport> reports;
    for (const auto& [id, d] : obs) {
      reports.push_back(compare_observed(dist, d, id));
      if (reports.back().beyond_histogram) {
        warn(fmt::format("{}: observed size lies beyond the histogram range", id));
      }
    }

    std::optional<ScatterTable> table;
    if (const auto pos_path = s.find(positions, "compare.positions")) {
      const auto pos = read_positions(existing_file(pos_path, "positions table"));
      PlateExtents plate{s.get(x_min, "plate.x_min_mm", 0.0), s.get(x_max, "plate.x_max_mm", 0.0),
                         s.get(y_min, "plate.y_min_mm", 0.0), s.get(y_max, "plate.y_max_mm", 0.0)};
      const PlatePosition centre = plate.centre();
      for (auto& r : reports) {
        const auto a = pos.find(r.coupon_fit_id);
        const auto b = pos.find(r.part_specimen_id);
        if (a == pos.end() || b == pos.end()) continue;
        r.cartesian_distance_mm = cartesian_distance(a->second, b->second);
        r.radial_distance_mm = radial_distance(b->second, a->second, centre);
      }
      table = location_scatter(reports, pos, centre);
      for (const auto& w : table->warnings) warn(w);
    } else {
      warn("no plate positions given; distances omitted");
    }

    write_to(s.get(out, "compare.out", std::string()),
             [&](std::ostream& o) { write_equivalence_table(o, reports); });
    if (const auto sc = s.find(scatter, "compare.scatter"); sc && table) {
      write_to(*sc, [&](std::ostream& o) { write_scatter_table(o, *table); });
    }
    return kOk;
  }
};

struct SweepCmd {
  std::optional<std::string> fit_path, volumes, out, ks_matrix;
  McFlags mc;

  int run(const Settings& s) const {
    const auto fit = read_fit_report_file(existing_file(s.find(fit_path, "sweep.fit"), "fit report"));
    const auto list = cli::parse_number_list(s.get(volumes, "sweep.volumes_mm3", std::string()),
                                             "volume list");
    if (list.empty()) throw UsageError("volume list is empty");
    const McConfig config = mc.config(s);
    const auto rows = volume_sweep(fit, list, config);
    const Provenance prov{fit.id, 0.0, config};
    write_to(s.get(out, "sweep.out", std::string()),
             [&](std::ostream& o) { write_sweep_table(o, rows, prov); });
    if (const auto km = s.find(ks_matrix, "sweep.ks_matrix")) {
      const auto matrix = ks_mode_matrix(fit, list, config);
      write_to(*km, [&](std::ostream& o) { write_ks_matrix(o, matrix, prov); });
    }
    return kOk;
  }
};

struct SimulateCmd {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> id, out, largest_out;
  std::optional<double> log_mean, log_sd, threshold, scale, shape, lambda_above, lambda_below, volume;
  std::optional<double> voi;
  std::optional<std::size_t> replications;
  std::optional<unsigned> workers;

  int run(const Settings& s) const {
    const auto sd = s.find(seed, "mc.seed");
    if (!sd) throw UsageError("--seed (or mc.seed) is required for stochastic commands");
    GroundTruth truth;
    truth.bulk.log_mean = s.get(log_mean, "truth.bulk_log_mean", truth.bulk.log_mean);
    truth.bulk.log_sd = s.get(log_sd, "truth.bulk_log_sd", truth.bulk.log_sd);
    truth.tail.threshold = s.get(threshold, "truth.threshold_um", truth.tail.threshold);
    truth.tail.scale = s.get(scale, "truth.scale_um", truth.tail.scale);
    truth.tail.shape = s.get(shape, "truth.shape", truth.tail.shape);
    truth.lambda_above = s.get(lambda_above, "truth.lambda_above", truth.lambda_above);
    truth.lambda_below = s.get(lambda_below, "truth.lambda_below", truth.lambda_below);
    truth.specimen_volume_mm3 = s.get(volume, "truth.specimen_volume_mm3", truth.specimen_volume_mm3);
    try {
      truth.validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }

    const auto dataset = generate_specimen(truth, *sd, s.get(id, "specimen.id", std::string("synthetic")));
    write_to(s.get(out, "simulate.out", std::string()),
             [&](std::ostream& o) { write_dataset(o, dataset); });

    if (const auto path = s.find(largest_out, "simulate.largest_out")) {
      const auto v = s.find(voi, "simulate.voi_mm3");
      if (!v) throw UsageError("--largest-out needs --voi");
      const std::size_t n = s.get(replications, "simulate.replications", std::size_t{10000});
      const auto largest = brute_force_largest(truth, VolumeOfInterest(*v), n, *sd,
                                               s.get(workers, "mc.workers", 0u));
      write_to(*path, [&](std::ostream& o) {
        o << fmt::format("# porestat_version={}\n# seed={}\n# voi_mm3={}\n", toolkit_version(), *sd, *v);
        o << "replication,largest_um\n";
        for (std::size_t i = 0; i < largest.size(); ++i) o << fmt::format("{},{}\n", i + 1, largest[i]);
      });
    }
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Largest-pore statistics from CT pore tables"};
  app.set_version_flag("--version", std::string(toolkit_version()));
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "INI config file; flags override its keys")
      ->check(CLI::ExistingFile);

  GeomCmd geom;
  auto* geom_app = app.add_subcommand("geom", "Ingest a pore table and dump it with derived columns");
  geom.specimen.attach(*geom_app);
  geom_app->add_option("-o,--out", geom.out, "Output file (default stdout)");

  FitCmd fit;
  auto* fit_app = app.add_subcommand("fit", "Threshold scan and tail fit");
  fit.specimen.attach(*fit_app);
  fit_app->add_option("--threshold", fit.threshold, "Manual threshold, µm");
  fit_app->add_option("--estimator", fit.estimator, "auto, mle or mom");
  fit_app->add_option("--grid", fit.grid, "Candidate thresholds, comma-separated µm");
  fit_app->add_option("--min-tail-count", fit.min_tail, "Minimum exceedances");
  fit_app->add_option("--window", fit.window, "Stability window (candidates)");
  fit_app->add_option("--tolerance", fit.tolerance, "Stability tolerance (standard errors)");
  fit_app->add_option("--out-dir", fit.out_dir, "Output directory");

  PredictCmd predict;
  auto* predict_app = app.add_subcommand("predict", "Largest-pore distribution for a volume");
  predict_app->add_option("--fit", predict.fit_path, "Fit report");
  predict_app->add_option("--volume", predict.volume, "Volume of interest, mm³");
  predict_app->add_option("--out-dir", predict.out_dir, "Output directory");
  predict.mc.attach(*predict_app);

  CompareCmd compare;
  auto* compare_app = app.add_subcommand("compare", "p- and q-values of observed largest pores");
  compare_app->add_option("--distribution", compare.dist_path, "cdf.csv from predict");
  compare_app->add_option("--observed", compare.observed, "Observed largest pore, µm");
  compare_app->add_option("--part-id", compare.part_id, "Id of the observed specimen");
  compare_app->add_option("--observations", compare.observations,
                          "CSV part_specimen_id,observed_largest_um");
  compare_app->add_option("--positions", compare.positions, "CSV id,x_mm,y_mm");
  compare_app->add_option("--plate-x-min", compare.x_min, "Plate extent, mm");
  compare_app->add_option("--plate-x-max", compare.x_max, "Plate extent, mm");
  compare_app->add_option("--plate-y-min", compare.y_min, "Plate extent, mm");
  compare_app->add_option("--plate-y-max", compare.y_max, "Plate extent, mm");
  compare_app->add_option("-o,--out", compare.out, "Report table (default stdout)");
  compare_app->add_option("--scatter", compare.scatter, "Distance-versus-similarity table");

  SweepCmd sweep;
  auto* sweep_app = app.add_subcommand("sweep", "Distribution summary across volumes");
  sweep_app->add_option("--fit", sweep.fit_path, "Fit report");
  sweep_app->add_option("--volumes", sweep.volumes, "Comma-separated volumes, mm³");
  sweep_app->add_option("-o,--out", sweep.out, "Sweep table (default stdout)");
  sweep_app->add_option("--ks-matrix", sweep.ks_matrix, "Also write the mode-comparison KS table");
  sweep.mc.attach(*sweep_app);

  SimulateCmd sim;
  auto* sim_app = app.add_subcommand("simulate", "Synthetic specimen from a known ground truth");
  sim_app->add_option("--seed", sim.seed, "Random seed (required)");
  sim_app->add_option("--id", sim.id, "Specimen id");
  sim_app->add_option("--bulk-log-mean", sim.log_mean, "Mean of ln D below the threshold");
  sim_app->add_option("--bulk-log-sd", sim.log_sd, "Sd of ln D below the threshold");
  sim_app->add_option("--threshold", sim.threshold, "Tail threshold µ, µm");
  sim_app->add_option("--scale", sim.scale, "Tail scale σ, µm");
  sim_app->add_option("--shape", sim.shape, "Tail shape ξ");
  sim_app->add_option("--lambda-above", sim.lambda_above, "Pores above µ per mm³");
  sim_app->add_option("--lambda-below", sim.lambda_below, "Pores below µ per mm³");
  sim_app->add_option("--specimen-volume", sim.volume, "Scanned volume, mm³");
  sim_app->add_option("-o,--out", sim.out, "Pore table (default stdout)");
  sim_app->add_option("--largest-out", sim.largest_out, "Brute-force largest-pore sample");
  sim_app->add_option("--voi", sim.voi, "Volume of interest for --largest-out, mm³");
  sim_app->add_option("--replications", sim.replications, "Replications for --largest-out");
  sim_app->add_option("--workers", sim.workers, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Settings settings = Settings::load(config_path);
    if (geom_app->parsed()) return geom.run(settings);
    if (fit_app->parsed()) return fit.run(settings);
    if (predict_app->parsed()) return predict.run(settings);
    if (compare_app->parsed()) return compare.run(settings);
    if (sweep_app->parsed()) return sweep.run(settings);
    if (sim_app->parsed()) return sim.run(settings);
  } catch (const UsageError& e) {
    fmt::print(std::cerr, "porestat: error: {}\n", e.what());
    return kUsage;
  } catch (const DomainError& e) {
    fmt::print(std::cerr, "porestat: error: {}\n", e.what());
    return kUsage;
  } catch (const IngestError& e) {
    std::string where;
    if (e.row() > 0) where += fmt::format(" (row {})", e.row());
    if (!e.column().empty()) where += fmt::format(" [column {}]", e.column());
    fmt::print(std::cerr, "porestat: data error: {}{}\n", e.what(), where);
    return kData;
  } catch (const FitError& e) {
    fmt::print(std::cerr, "porestat: fit failed: {}\n", e.what());
    return kStatistics;
  } catch (const ThresholdError& e) {
    fmt::print(std::cerr, "porestat: threshold selection failed: {}\n", e.what());
    return kStatistics;
  } catch (const RefusalError& e) {
    fmt::print(std::cerr, "porestat: refused: {}\n", e.what());
    return kStatistics;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "porestat: error: {}\n", e.what());
    return kData;
  }
  return kUsage;
}
