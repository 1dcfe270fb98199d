#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace porestat {

// Pore-level quantities are in µm / µm² / µm³, specimen-level volumes in mm³.
inline constexpr double kCubicMicronsPerCubicMillimetre = 1e9;

// Sphericity of an exact sphere evaluates to 1 only up to rounding.
inline constexpr double kSphericityRounding = 1e-12;

/// Diameter of the sphere with the given volume, (6V/π)^(1/3).
double equiv_diameter(double volume_um3);

/// Minimum over maximum Feret diameter; throws DomainError unless 0 < a ≤ b.
double aspect_ratio(double min_feret_um, double max_feret_um);

/// π^(1/3)(6V)^(2/3)/A. Equals 1 for a sphere; values above 1 indicate the
/// surface area was underestimated and are flagged by ingestion, not rejected.
double sphericity(double volume_um3, double surface_area_um2);

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct PlatePosition {
  double x_mm = 0.0;
  double y_mm = 0.0;
};

struct PoreRecord {
  std::string pore_id;
  double volume_um3 = 0.0;
  double surface_area_um2 = 0.0;
  double min_feret_um = 0.0;
  double max_feret_um = 0.0;
  std::optional<Point3> centroid_um;

  double equiv_diameter_um = 0.0;
  double aspect_ratio = 0.0;
  double sphericity = 0.0;

  bool sphericity_flagged() const noexcept { return sphericity > 1.0 + kSphericityRounding; }
};

// Computes the derived columns; throws DomainError on invalid measurements.
PoreRecord make_pore(std::string pore_id, double volume_um3, double surface_area_um2,
                     double min_feret_um, double max_feret_um,
                     std::optional<Point3> centroid_um = std::nullopt);

struct SpecimenMetadata {
  std::string specimen_id;
  std::string geometry_label;
  double scan_velocity_mm_s = 0.0;
  double scanned_volume_mm3 = 0.0;
  std::optional<PlatePosition> build_location;
};

// A specimen's pore population. Immutable once built; pores are kept sorted by
// equivalent diameter, largest first, so tail work reads a prefix.
class SpecimenDataset {
 public:
  SpecimenDataset(SpecimenMetadata metadata, std::vector<PoreRecord> pores);

  const SpecimenMetadata& metadata() const noexcept { return metadata_; }
  std::span<const PoreRecord> pores() const noexcept { return pores_; }
  std::size_t size() const noexcept { return pores_.size(); }
  bool empty() const noexcept { return pores_.empty(); }

  // Equivalent diameters in canonical (descending) order.
  std::span<const double> diameters() const noexcept { return diameters_; }

  // Number of pores with D_s strictly above `threshold_um`.
  std::size_t count_above(double threshold_um) const noexcept;

  // Number of pores flagged with sphericity > 1.
  std::size_t sphericity_warnings() const noexcept;

 private:
  SpecimenMetadata metadata_;
  std::vector<PoreRecord> pores_;
  std::vector<double> diameters_;
};

/// Reads a comma-separated pore table with a header row. Required columns:
/// pore_id, volume_um3, surface_area_um2, min_feret_um, max_feret_um.
/// centroid_{x,y,z}_um are optional; other columns are ignored. Lines starting
/// with '#' are comments of the form `# key=value`; recognised metadata keys
/// fill fields of `metadata` that are still unset.
SpecimenDataset ingest_specimen(std::istream& table, SpecimenMetadata metadata);
SpecimenDataset ingest_specimen_file(const std::string& path, SpecimenMetadata metadata);

/// Writes metadata comments followed by the raw columns and the derived
/// equiv_diameter_um, aspect_ratio and sphericity. Numbers are written in
/// shortest round-trip form, so re-ingesting reproduces every value exactly.
void write_dataset(std::ostream& out, const SpecimenDataset& dataset);

}  // namespace porestat
