#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "porestat/error.hpp"
#include "porestat/pore_geometry.hpp"

using namespace porestat;

namespace {

SpecimenMetadata meta(double volume_mm3 = 10.0) {
  SpecimenMetadata m;
  m.specimen_id = "s1";
  m.scanned_volume_mm3 = volume_mm3;
  return m;
}

const char* kThreeRows =
    "pore_id,volume_um3,surface_area_um2,min_feret_um,max_feret_um\n"
    "a,523598.7755982989,31415.926535897932,100,100\n"
    "b,15.625,37.5,2.5,4.3\n"
    "c,1000,300,5,20\n";

}  // namespace

TEST(EquivDiameter, SphereOfRadiusFifty) {
  EXPECT_NEAR(equiv_diameter(523598.776), 100.0, 1e-6);
}

TEST(EquivDiameter, SingleVoxel) { EXPECT_NEAR(equiv_diameter(15.625), 3.1018, 1e-4); }

TEST(EquivDiameter, UnitDiameter) { EXPECT_NEAR(equiv_diameter(std::numbers::pi / 6.0), 1.0, 1e-15); }

TEST(EquivDiameter, EightfoldVolumeDoublesDiameter) {
  for (double v : {1e-3, 1.0, 77.0, 5e8}) {
    EXPECT_NEAR(equiv_diameter(8.0 * v), 2.0 * equiv_diameter(v), 1e-12 * equiv_diameter(v));
    EXPECT_LT(equiv_diameter(v), equiv_diameter(v * 1.001));
  }
}

TEST(EquivDiameter, RejectsNonPositiveVolume) {
  EXPECT_THROW(equiv_diameter(0.0), DomainError);
  EXPECT_THROW(equiv_diameter(-1.0), DomainError);
}

TEST(AspectRatio, Cases) {
  EXPECT_DOUBLE_EQ(aspect_ratio(10, 10), 1.0);
  EXPECT_DOUBLE_EQ(aspect_ratio(5, 20), 0.25);
  EXPECT_THROW(aspect_ratio(20, 5), DomainError);
  EXPECT_THROW(aspect_ratio(0, 5), DomainError);
}

TEST(Sphericity, SphereIsOne) {
  const double v = 4321.0;
  const double a = std::cbrt(std::numbers::pi) * std::pow(6.0 * v, 2.0 / 3.0);
  EXPECT_NEAR(sphericity(v, a), 1.0, 1e-14);
}

TEST(Sphericity, Cube) {
  const double s = 3.0;
  EXPECT_NEAR(sphericity(s * s * s, 6 * s * s), std::cbrt(std::numbers::pi / 6.0), 1e-14);
  EXPECT_NEAR(sphericity(s * s * s, 6 * s * s), 0.8060, 1e-4);
}

TEST(Sphericity, HugeAreaTendsToZero) { EXPECT_LT(sphericity(1.0, 1e12), 1e-10); }

TEST(Sphericity, AboveOneIsFlaggedNotRejected) {
  const PoreRecord p = make_pore("x", 1000, 100, 5, 10);
  EXPECT_GT(p.sphericity, 1.0);
  EXPECT_TRUE(p.sphericity_flagged());
  const double d = 7.0;
  const PoreRecord sphere =
      make_pore("s", std::numbers::pi * d * d * d / 6, std::numbers::pi * d * d, d, d);
  EXPECT_FALSE(sphere.sphericity_flagged());
}

TEST(Ingest, ThreeRows) {
  std::istringstream in(kThreeRows);
  const auto ds = ingest_specimen(in, meta());
  ASSERT_EQ(ds.size(), 3u);
  // Sorted by diameter, largest first.
  EXPECT_EQ(ds.pores()[0].pore_id, "a");
  EXPECT_NEAR(ds.pores()[0].equiv_diameter_um, 100.0, 1e-9);
  EXPECT_NEAR(ds.pores()[0].sphericity, 1.0, 1e-12);
  for (const auto& p : ds.pores()) {
    EXPECT_GT(p.equiv_diameter_um, 0.0);
    EXPECT_GT(p.aspect_ratio, 0.0);
    EXPECT_GT(p.sphericity, 0.0);
  }
  EXPECT_DOUBLE_EQ(ds.pores()[1].aspect_ratio, 0.25);
  EXPECT_EQ(ds.sphericity_warnings(), 1u);  // pore c: A too small for its volume
}

TEST(Ingest, HeaderOnlyGivesEmptyDataset) {
  std::istringstream in("pore_id,volume_um3,surface_area_um2,min_feret_um,max_feret_um\n");
  const auto ds = ingest_specimen(in, meta());
  EXPECT_TRUE(ds.empty());
}

TEST(Ingest, EmptyInputSaysNoRows) {
  std::istringstream in("");
  try {
    ingest_specimen(in, meta());
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("no rows"), std::string::npos);
  }
}

TEST(Ingest, NegativeVolumeCitesRow) {
  std::istringstream in(
      "pore_id,volume_um3,surface_area_um2,min_feret_um,max_feret_um\n"
      "a,10,30,1,2\n"
      "b,-1,30,1,2\n");
  try {
    ingest_specimen(in, meta());
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "volume_um3");
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(Ingest, MissingColumnNamed) {
  std::istringstream in("pore_id,volume_um3,min_feret_um,max_feret_um\na,1,1,1\n");
  try {
    ingest_specimen(in, meta());
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_EQ(e.column(), "surface_area_um2");
    EXPECT_NE(std::string(e.what()).find("surface_area_um2"), std::string::npos);
  }
}

TEST(Ingest, PartialCentroidRejected) {
  std::istringstream in(
      "pore_id,volume_um3,surface_area_um2,min_feret_um,max_feret_um,centroid_x_um\n");
  EXPECT_THROW(ingest_specimen(in, meta()), IngestError);
}

TEST(Ingest, CentroidAndCommentMetadata) {
  std::istringstream in(
      "# specimen_id=from_file\n"
      "# scanned_volume_mm3=12.5\n"
      "# build_x_mm=3\n# build_y_mm=4\n"
      "pore_id,volume_um3,surface_area_um2,min_feret_um,max_feret_um,centroid_x_um,centroid_y_um,"
      "centroid_z_um,extra\n"
      "a,10,30,1,2,1,2,3,ignored\n");
  SpecimenMetadata m;
  const auto ds = ingest_specimen(in, m);
  EXPECT_EQ(ds.metadata().specimen_id, "from_file");
  EXPECT_DOUBLE_EQ(ds.metadata().scanned_volume_mm3, 12.5);
  ASSERT_TRUE(ds.metadata().build_location);
  EXPECT_DOUBLE_EQ(ds.metadata().build_location->y_mm, 4.0);
  ASSERT_TRUE(ds.pores()[0].centroid_um);
  EXPECT_DOUBLE_EQ(ds.pores()[0].centroid_um->z, 3.0);
}

TEST(Ingest, CallerMetadataWins) {
  std::istringstream in(
      "# specimen_id=from_file\n"
      "pore_id,volume_um3,surface_area_um2,min_feret_um,max_feret_um\n");
  const auto ds = ingest_specimen(in, meta());
  EXPECT_EQ(ds.metadata().specimen_id, "s1");
}

TEST(Ingest, NonPositiveScannedVolumeRejected) {
  std::istringstream in("pore_id,volume_um3,surface_area_um2,min_feret_um,max_feret_um\n");
  EXPECT_THROW(ingest_specimen(in, meta(0.0)), Error);
}

TEST(Dataset, CountAboveIsStrict) {
  std::istringstream in(kThreeRows);
  const auto ds = ingest_specimen(in, meta());
  const double d_b = ds.pores()[2].equiv_diameter_um;
  EXPECT_EQ(ds.count_above(d_b), 2u);
  EXPECT_EQ(ds.count_above(0.0), 3u);
  EXPECT_EQ(ds.count_above(1e9), 0u);
}

TEST(Dataset, WriteThenIngestIsLossless) {
  std::istringstream in(kThreeRows);
  const auto ds = ingest_specimen(in, meta());
  std::ostringstream out;
  write_dataset(out, ds);
  std::istringstream back(out.str());
  const auto again = ingest_specimen(back, SpecimenMetadata{});
  ASSERT_EQ(again.size(), ds.size());
  EXPECT_EQ(again.metadata().specimen_id, "s1");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(again.pores()[i].pore_id, ds.pores()[i].pore_id);
    EXPECT_EQ(again.pores()[i].volume_um3, ds.pores()[i].volume_um3);
    EXPECT_EQ(again.pores()[i].equiv_diameter_um, ds.pores()[i].equiv_diameter_um);
  }
  std::ostringstream out2;
  write_dataset(out2, again);
  EXPECT_EQ(out.str(), out2.str());
}
