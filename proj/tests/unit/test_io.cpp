#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "hhsar/errors.hpp"
#include "hhsar/io.hpp"
#include "tempdir.hpp"

using namespace hhsar;
using hhsar::testing::slurp;
using hhsar::testing::spit;
using hhsar::testing::TempDir;

namespace {

DataCube random_cube() {
  SyntheticAperture ap;
  ap.scan_positions = 3;
  ap.channels = 2;
  for (int i = 0; i < 6; ++i) ap.elements.emplace_back(0.01 * i, -0.02 * i, 0.001 * i);
  DataCube cube(ap, FrequencyGrid(12e9, 15e9, 5));
  std::mt19937 rng(3);
  std::normal_distribution<float> g;
  for (auto& v : cube.values) v = cdouble(g(rng), g(rng));
  return cube;
}

void replace_once(const std::filesystem::path& p, const std::string& from, const std::string& to) {
  std::string s = slurp(p);
  const auto at = s.find(from);
  ASSERT_NE(at, std::string::npos) << from;
  s.replace(at, from.size(), to);
  spit(p, s);
}

}  // namespace

TEST(CubeIo, RoundTripIsBitExact) {
  TempDir dir;
  const auto cube = random_cube();
  CubeMetadata meta;
  meta.region = ImagingRegion{-0.1, 0.1, -0.2, 0.2, 0.1, 0.3};
  meta.provenance["seed"] = "3";
  write_cube(dir / "c.bin", cube, meta);
  EXPECT_EQ(std::filesystem::file_size(dir / "c.bin"), 6u * 5u * 8u);
  CubeMetadata back_meta;
  const auto back = read_cube(dir / "c.bin", &back_meta);
  ASSERT_EQ(back.values.size(), cube.values.size());
  for (std::size_t i = 0; i < cube.values.size(); ++i) {
    // Values are float32 to begin with, so the round trip is exact.
    EXPECT_EQ(back.values[i], cube.values[i]);
  }
  EXPECT_EQ(back.frequencies, cube.frequencies);
  EXPECT_EQ(back.aperture.channels, 2u);
  EXPECT_EQ(back.aperture.elements[4], cube.aperture.elements[4]);
  ASSERT_TRUE(back_meta.region.has_value());
  EXPECT_EQ(back_meta.region->y_max, 0.2);
  EXPECT_EQ(back_meta.provenance.at("seed"), "3");
}

TEST(CubeIo, PayloadIsLittleEndianFloat32) {
  TempDir dir;
  auto cube = random_cube();
  cube.values[0] = cdouble(1.5, -2.0);
  write_cube(dir / "c.bin", cube);
  const std::string bytes = slurp(dir / "c.bin");
  const unsigned char expect_re[4] = {0x00, 0x00, 0xC0, 0x3F};
  const unsigned char expect_im[4] = {0x00, 0x00, 0x00, 0xC0};
  EXPECT_EQ(std::memcmp(bytes.data(), expect_re, 4), 0);
  EXPECT_EQ(std::memcmp(bytes.data() + 4, expect_im, 4), 0);
}

TEST(CubeIo, TruncatedPayload) {
  TempDir dir;
  write_cube(dir / "c.bin", random_cube());
  std::filesystem::resize_file(dir / "c.bin", 6 * 5 * 8 - 3);
  EXPECT_THROW(read_cube(dir / "c.bin"), TruncatedPayloadError);
}

TEST(CubeIo, OversizedPayloadIsDimensionMismatch) {
  TempDir dir;
  write_cube(dir / "c.bin", random_cube());
  std::filesystem::resize_file(dir / "c.bin", 6 * 5 * 8 + 8);
  EXPECT_THROW(read_cube(dir / "c.bin"), DimensionMismatchError);
}

TEST(CubeIo, InconsistentDimsAreRejected) {
  TempDir dir;
  write_cube(dir / "c.bin", random_cube());
  replace_once(sidecar_path(dir / "c.bin"), "\"elements\": 6", "\"elements\": 7");
  EXPECT_THROW(read_cube(dir / "c.bin"), DimensionMismatchError);
}

TEST(CubeIo, SchemaProblems) {
  TempDir dir;
  write_cube(dir / "c.bin", random_cube());
  const auto side = sidecar_path(dir / "c.bin");
  const std::string good = slurp(side);

  replace_once(side, "\"schema_version\": 1", "\"schema_version\": 2");
  EXPECT_THROW(read_cube(dir / "c.bin"), SchemaError);

  spit(side, good);
  replace_once(side, "hhsar.cube", "hhsar.volume");
  EXPECT_THROW(read_cube(dir / "c.bin"), SchemaError);

  spit(side, good);
  replace_once(side, "\"f_min\"", "\"fmin\"");
  EXPECT_THROW(read_cube(dir / "c.bin"), SchemaError);

  spit(side, "{not json");
  EXPECT_THROW(read_cube(dir / "c.bin"), SchemaError);

  std::filesystem::remove(side);
  EXPECT_THROW(read_cube(dir / "c.bin"), IoError);
  EXPECT_THROW(read_cube(dir / "missing.bin"), IoError);
}

TEST(VolumeIo, RoundTripKeepsGridAndProvenance) {
  TempDir dir;
  ImageVolume v;
  v.grid = CartesianGrid::spanning(ImagingRegion{-0.1, 0.1, -0.1, 0.1, 0.1, 0.3}, {4, 3, 2});
  v.values.resize(v.grid.size());
  for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] = cdouble(0.5 * i, -0.25 * i);
  v.provenance["algorithm"] = "bpa";
  write_volume(dir / "v.bin", v);
  const auto back = read_volume(dir / "v.bin");
  EXPECT_EQ(back.grid.dims, v.grid.dims);
  EXPECT_TRUE(back.grid.origin.isApprox(v.grid.origin, 1e-15));
  EXPECT_EQ(back.values, v.values);
  EXPECT_EQ(back.provenance.at("algorithm"), "bpa");

  std::filesystem::resize_file(dir / "v.bin", 10);
  EXPECT_THROW(read_volume(dir / "v.bin"), TruncatedPayloadError);
  v.values.pop_back();
  EXPECT_THROW(write_volume(dir / "w.bin", v), DimensionMismatchError);
}

TEST(Pgm, TwoByTwoCheckerboard) {
  TempDir dir;
  const Image2D img{2, 2, {0.0, 1.0, 1.0, 0.0}};
  export_projection(img, dir / "p.pgm");
  EXPECT_EQ(slurp(dir / "p.pgm"), std::string("P5\n2 2\n255\n\x00\xff\xff\x00", 15));
}

TEST(Pgm, HalfGreyRoundsUp) {
  TempDir dir;
  export_projection(Image2D{3, 1, {0.5, 0.5, 0.5}}, dir / "p.pgm");
  const std::string s = slurp(dir / "p.pgm");
  EXPECT_EQ(static_cast<unsigned char>(s.back()), 128);
}

TEST(Pgm, ReReadWithinOneLevel) {
  TempDir dir;
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  Image2D img{7, 5, std::vector<double>(35)};
  for (auto& p : img.pixels) p = u(rng);
  for (int depth : {8, 16}) {
    export_projection(img, dir / "p.pgm", depth);
    const auto back = read_pgm(dir / "p.pgm");
    ASSERT_EQ(back.width, 7u);
    ASSERT_EQ(back.height, 5u);
    const double tol = depth == 8 ? 0.5 / 255.0 : 0.5 / 65535.0;
    for (std::size_t i = 0; i < 35; ++i) EXPECT_LE(std::abs(back.pixels[i] - img.pixels[i]), tol + 1e-12);
  }
  EXPECT_EQ(std::filesystem::file_size(dir / "p.pgm"), std::string("P5\n7 5\n65535\n").size() + 70);
}

TEST(Pgm, RejectsBadInput) {
  TempDir dir;
  EXPECT_THROW(export_projection(Image2D{1, 1, {1.5}}, dir / "p.pgm"), DomainError);
  EXPECT_THROW(export_projection(Image2D{1, 1, {std::nan("")}}, dir / "p.pgm"), DomainError);
  EXPECT_THROW(export_projection(Image2D{1, 1, {0.5}}, dir / "p.pgm", 12), ConfigError);
  spit(dir / "q.pgm", "P2\n1 1\n255\n0\n");
  EXPECT_THROW(read_pgm(dir / "q.pgm"), SchemaError);
}

TEST(Json, ReportsSerialise) {
  PsfReport p;
  p.mainlobe_width = 0.0125;
  p.pslr = -13.2;
  const std::string s = to_json(p);
  EXPECT_NE(s.find("\"mainlobe_width_mm\": 12.5"), std::string::npos);
  OpCountReport r;
  r.levels = 3;
  EXPECT_NE(to_json(r).find("\"levels\": 3"), std::string::npos);
}
