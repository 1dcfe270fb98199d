#include "porestat/pore_geometry.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "porestat/error.hpp"
#include "text_util.hpp"

namespace porestat {

double equiv_diameter(double volume_um3) {
  if (!(volume_um3 > 0.0) || !std::isfinite(volume_um3)) {
    throw DomainError(fmt::format("equiv_diameter: volume must be positive, got {}", volume_um3));
  }
  return std::cbrt(6.0 * volume_um3 / std::numbers::pi);
}

double aspect_ratio(double min_feret_um, double max_feret_um) {
  if (!(min_feret_um > 0.0) || !(max_feret_um > 0.0)) {
    throw DomainError(fmt::format("aspect_ratio: Feret diameters must be positive, got {} and {}",
                                  min_feret_um, max_feret_um));
  }
  if (min_feret_um > max_feret_um) {
    throw DomainError(fmt::format("aspect_ratio: min Feret {} exceeds max Feret {}", min_feret_um,
                                  max_feret_um));
  }
  return min_feret_um / max_feret_um;
}

double sphericity(double volume_um3, double surface_area_um2) {
  if (!(volume_um3 > 0.0) || !(surface_area_um2 > 0.0)) {
    throw DomainError(fmt::format("sphericity: volume and area must be positive, got {} and {}",
                                  volume_um3, surface_area_um2));
  }
  const double v6 = 6.0 * volume_um3;
  return std::cbrt(std::numbers::pi * v6 * v6) / surface_area_um2;
}

PoreRecord make_pore(std::string pore_id, double volume_um3, double surface_area_um2,
                     double min_feret_um, double max_feret_um, std::optional<Point3> centroid_um) {
  PoreRecord p;
  p.pore_id = std::move(pore_id);
  p.volume_um3 = volume_um3;
  p.surface_area_um2 = surface_area_um2;
  p.min_feret_um = min_feret_um;
  p.max_feret_um = max_feret_um;
  p.centroid_um = centroid_um;
  p.equiv_diameter_um = equiv_diameter(volume_um3);
  p.aspect_ratio = aspect_ratio(min_feret_um, max_feret_um);
  p.sphericity = sphericity(volume_um3, surface_area_um2);
  return p;
}

SpecimenDataset::SpecimenDataset(SpecimenMetadata metadata, std::vector<PoreRecord> pores)
    : metadata_(std::move(metadata)), pores_(std::move(pores)) {
  if (!(metadata_.scanned_volume_mm3 > 0.0) || !std::isfinite(metadata_.scanned_volume_mm3)) {
    throw DomainError(fmt::format("specimen '{}': scanned volume must be positive, got {}",
                                  metadata_.specimen_id, metadata_.scanned_volume_mm3));
  }
  // Stable so that ties keep their input order.
  std::stable_sort(pores_.begin(), pores_.end(), [](const PoreRecord& a, const PoreRecord& b) {
    return a.equiv_diameter_um > b.equiv_diameter_um;
  });
  diameters_.reserve(pores_.size());
  for (const auto& p : pores_) diameters_.push_back(p.equiv_diameter_um);
}

std::size_t SpecimenDataset::count_above(double threshold_um) const noexcept {
  // diameters_ is descending: find the first element not above the threshold.
  auto it = std::partition_point(diameters_.begin(), diameters_.end(),
                                 [threshold_um](double d) { return d > threshold_um; });
  return static_cast<std::size_t>(it - diameters_.begin());
}

std::size_t SpecimenDataset::sphericity_warnings() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      pores_.begin(), pores_.end(), [](const PoreRecord& p) { return p.sphericity_flagged(); }));
}

namespace {

constexpr std::array<const char*, 5> kRequired = {"pore_id", "volume_um3", "surface_area_um2",
                                                  "min_feret_um", "max_feret_um"};
constexpr std::array<const char*, 3> kCentroid = {"centroid_x_um", "centroid_y_um",
                                                  "centroid_z_um"};

void apply_metadata_comment(std::string_view line, SpecimenMetadata& meta) {
  auto kv = detail::split_key_value(line);
  if (!kv) return;
  const auto& [key, value] = *kv;
  auto number = [&](double& field) {
    if (field == 0.0) {
      if (auto v = detail::parse_double(value)) field = *v;
    }
  };
  if (key == "specimen_id" && meta.specimen_id.empty()) {
    meta.specimen_id = value;
  } else if (key == "geometry_label" && meta.geometry_label.empty()) {
    meta.geometry_label = value;
  } else if (key == "scan_velocity_mm_s") {
    number(meta.scan_velocity_mm_s);
  } else if (key == "scanned_volume_mm3") {
    number(meta.scanned_volume_mm3);
  } else if (key == "build_x_mm" || key == "build_y_mm") {
    auto v = detail::parse_double(value);
    if (!v) return;
    if (!meta.build_location) meta.build_location = PlatePosition{};
    (key == "build_x_mm" ? meta.build_location->x_mm : meta.build_location->y_mm) = *v;
  }
}

}  // namespace

SpecimenDataset ingest_specimen(std::istream& table, SpecimenMetadata metadata) {
  std::string line;
  std::vector<std::string> header;
  bool have_header = false;
  std::vector<PoreRecord> pores;
  std::size_t row = 0;
  std::map<std::string, std::size_t> col;
  bool has_centroid = false;

  // Metadata that the caller already set wins over file comments.
  const bool caller_build = metadata.build_location.has_value();

  while (std::getline(table, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    if (line.front() == '#') {
      if (!(caller_build && (line.find("build_x_mm") != std::string::npos ||
                             line.find("build_y_mm") != std::string::npos))) {
        apply_metadata_comment(std::string_view(line).substr(1), metadata);
      }
      continue;
    }
    auto cells = detail::split_csv(line);
    if (!have_header) {
      header = cells;
      for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
      for (const char* name : kRequired) {
        if (!col.contains(name)) {
          throw IngestError(fmt::format("pore table: missing required column '{}'", name), 0, name);
        }
      }
      std::size_t present = 0;
      for (const char* name : kCentroid) present += col.contains(name) ? 1 : 0;
      if (present != 0 && present != kCentroid.size()) {
        throw IngestError("pore table: centroid columns must be given all together or not at all",
                          0, "centroid_x_um");
      }
      has_centroid = present == kCentroid.size();
      have_header = true;
      continue;
    }
    ++row;
    if (cells.size() != header.size()) {
      throw IngestError(fmt::format("pore table row {}: expected {} cells, found {}", row,
                                    header.size(), cells.size()),
                        row);
    }
    auto number = [&](const char* name) {
      const std::string& cell = cells[col.at(name)];
      auto v = detail::parse_double(cell);
      if (!v || !std::isfinite(*v)) {
        throw IngestError(
            fmt::format("pore table row {}, column '{}': cannot parse '{}'", row, name, cell), row,
            name);
      }
      return *v;
    };
    auto positive = [&](const char* name) {
      const double v = number(name);
      if (!(v > 0.0)) {
        throw IngestError(
            fmt::format("pore table row {}, column '{}': must be positive, got {}", row, name, v),
            row, name);
      }
      return v;
    };
    const double volume = positive("volume_um3");
    const double area = positive("surface_area_um2");
    const double min_feret = positive("min_feret_um");
    const double max_feret = positive("max_feret_um");
    if (min_feret > max_feret) {
      throw IngestError(fmt::format("pore table row {}, column 'min_feret_um': {} exceeds "
                                    "max_feret_um {}",
                                    row, min_feret, max_feret),
                        row, "min_feret_um");
    }
    std::optional<Point3> centroid;
    if (has_centroid) {
      centroid = Point3{number(kCentroid[0]), number(kCentroid[1]), number(kCentroid[2])};
    }
    pores.push_back(
        make_pore(cells[col.at("pore_id")], volume, area, min_feret, max_feret, centroid));
  }
  if (!have_header) throw IngestError("pore table: no rows (empty input)");
  return SpecimenDataset(std::move(metadata), std::move(pores));
}

SpecimenDataset ingest_specimen_file(const std::string& path, SpecimenMetadata metadata) {
  std::ifstream in(path);
  if (!in) throw IngestError(fmt::format("cannot open pore table '{}'", path));
  return ingest_specimen(in, std::move(metadata));
}

void write_dataset(std::ostream& out, const SpecimenDataset& dataset) {
  const auto& m = dataset.metadata();
  fmt::print(out, "# specimen_id={}\n", m.specimen_id);
  fmt::print(out, "# geometry_label={}\n", m.geometry_label);
  fmt::print(out, "# scan_velocity_mm_s={}\n", m.scan_velocity_mm_s);
  fmt::print(out, "# scanned_volume_mm3={}\n", m.scanned_volume_mm3);
  if (m.build_location) {
    fmt::print(out, "# build_x_mm={}\n# build_y_mm={}\n", m.build_location->x_mm,
               m.build_location->y_mm);
  }
  const bool centroid = std::any_of(dataset.pores().begin(), dataset.pores().end(),
                                    [](const PoreRecord& p) { return p.centroid_um.has_value(); });
  out << "pore_id,volume_um3,surface_area_um2,min_feret_um,max_feret_um";
  if (centroid) out << ",centroid_x_um,centroid_y_um,centroid_z_um";
  out << ",equiv_diameter_um,aspect_ratio,sphericity\n";
  for (const auto& p : dataset.pores()) {
    fmt::print(out, "{},{},{},{},{}", p.pore_id, p.volume_um3, p.surface_area_um2, p.min_feret_um,
               p.max_feret_um);
    if (centroid) {
      const Point3 c = p.centroid_um.value_or(Point3{});
      fmt::print(out, ",{},{},{}", c.x, c.y, c.z);
    }
    fmt::print(out, ",{},{},{}\n", p.equiv_diameter_um, p.aspect_ratio, p.sphericity);
  }
}

}  // namespace porestat
