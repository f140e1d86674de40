#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "hhsar/io.hpp"
#include "tempdir.hpp"

using namespace hhsar;
using hhsar::testing::slurp;
using hhsar::testing::spit;
using hhsar::testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kSmallConfig = R"({
  "seed": 5,
  "aperture": {"nx": 16, "ny": 16, "extent": 0.1,
               "jitter": {"depth_amplitude": 0.003, "lateral_amplitude": 0.0002, "tilt_share": 0.3}},
  "frequency": {"f_min": 12e9, "f_max": 15e9, "count": 12},
  "region": {"x": [-0.05, 0.05], "y": [-0.05, 0.05], "z": [0.1, 0.2]},
  "scene": {"type": "grid", "counts": [3, 3, 1], "spacing": 0.03, "center": [0.0, 0.0, 0.15]},
  "algorithm": {"name": "hhffbpa", "levels": 2, "oversample": 1.4, "kernel": "linear", "dims": [21, 21, 5]}
})";

std::string cfg_path(const char* name) { return std::string(HHSAR_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST(Cli, SimulateDeskCube) {
  TempDir dir;
  const auto r = run({"simulate", "--config", cfg_path("desk.json"), "--out", (dir / "c.bin").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("elements=1089"), std::string::npos);
  EXPECT_NE(r.out.find("frequencies=16"), std::string::npos);
  EXPECT_NE(r.out.find("scatterers=27"), std::string::npos);
  CubeMetadata meta;
  const auto cube = read_cube(dir / "c.bin", &meta);
  EXPECT_EQ(cube.element_count(), 1089u);
  EXPECT_EQ(cube.frequency_count(), 16u);
  ASSERT_TRUE(meta.region.has_value());
  EXPECT_DOUBLE_EQ(meta.region->z_max, 0.29);
}

TEST(Cli, EmptySceneGivesZeroCube) {
  TempDir dir;
  std::string cfg = kSmallConfig;
  const auto at = cfg.find("{\"type\": \"grid\"");
  cfg.replace(at, cfg.find('}', at) - at + 1, "{\"type\": \"empty\"}");
  spit(dir / "e.json", cfg);
  const auto r = run({"simulate", "--config", (dir / "e.json").string(), "--out", (dir / "c.bin").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cube = read_cube(dir / "c.bin");
  for (const auto& v : cube.values) ASSERT_EQ(v, cdouble{});
}

TEST(Cli, ConfigErrorsExitTwoAndNameTheField) {
  TempDir dir;
  std::string cfg = kSmallConfig;
  cfg.replace(cfg.find("\"seed\": 5"), 9, "\"seed\": \"five\"");
  spit(dir / "bad.json", cfg);
  auto r = run({"simulate", "--config", (dir / "bad.json").string(), "--out", (dir / "c.bin").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("seed"), std::string::npos) << r.err;

  cfg = kSmallConfig;
  cfg.replace(cfg.find("\"seed\""), 6, "\"sede\": 1, \"seed\"");
  spit(dir / "typo.json", cfg);
  r = run({"simulate", "--config", (dir / "typo.json").string(), "--out", (dir / "c.bin").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sede"), std::string::npos) << r.err;

  spit(dir / "junk.json", "{ nope");
  EXPECT_EQ(run({"simulate", "--config", (dir / "junk.json").string(), "--out", "x"}).code, 2);
  EXPECT_EQ(run({"reconstruct", "--bogus"}).code, 2);
}

TEST(Cli, MissingInputExitsThree) {
  TempDir dir;
  const auto r = run({"reconstruct", "--algo", "bpa", "--in", (dir / "none.bin").string(), "--out",
                      (dir / "v.bin").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(run({"simulate", "--config", (dir / "none.json").string(), "--out", "x"}).code, 3);
}

TEST(Cli, SingleLevelMatchesBpaAndProjectsNineSpots) {
  TempDir dir;
  spit(dir / "s.json", kSmallConfig);
  const std::string cube = (dir / "c.bin").string();
  ASSERT_EQ(run({"simulate", "--config", (dir / "s.json").string(), "--out", cube}).code, 0);
  auto r = run({"reconstruct", "--algo", "bpa", "--in", cube, "--out", (dir / "bpa.bin").string(), "--config",
                (dir / "s.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"reconstruct", "--algo", "hhffbpa", "--levels", "1", "--in", cube, "--out", (dir / "f1.bin").string(),
           "--config", (dir / "s.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"metrics", "--ref", (dir / "bpa.bin").string(), "--test", (dir / "f1.bin").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"psnr_db\": 200"), std::string::npos) << r.out;

  r = run({"metrics", "--ref", (dir / "bpa.bin").string(), "--test", (dir / "bpa.bin").string(), "--psf-cut",
           "x,0,0.15", "--psf-window", "0,0.0249"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"delta\""), std::string::npos);

  r = run({"reconstruct", "--algo", "hhffbpa", "--in", cube, "--out", (dir / "f2.bin").string(), "--config",
           (dir / "s.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("flagged_fraction="), std::string::npos);

  r = run({"project", "--in", (dir / "bpa.bin").string(), "--axis", "z", "--out", (dir / "p.pgm").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto img = read_pgm(dir / "p.pgm");
  ASSERT_EQ(img.width, 21u);
  ASSERT_EQ(img.height, 21u);
  int spots = 0;
  for (std::size_t y = 1; y + 1 < img.height; ++y) {
    for (std::size_t x = 1; x + 1 < img.width; ++x) {
      const double v = img.at(y, x);
      if (v < 0.85) continue;
      bool peak = true;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if ((dx || dy) && img.at(y + dy, x + dx) > v) peak = false;
      spots += peak;
    }
  }
  EXPECT_EQ(spots, 9);
}

TEST(Cli, BenchWithOneSizeHasNoSlope) {
  TempDir dir;
  spit(dir / "s.json", kSmallConfig);
  const auto r = run({"bench", "--config", (dir / "s.json").string(), "--sizes", "8", "--out",
                      (dir / "b.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("slope=none"), std::string::npos);
  const std::string csv = slurp(dir / "b.csv");
  EXPECT_EQ(csv.rfind("size,algo,seconds,predicted_ops,levels,status\n", 0), 0u);
  EXPECT_NE(csv.find("8,bpa,"), std::string::npos);
  EXPECT_NE(csv.find("8,hhffbpa,"), std::string::npos);
}

TEST(Cli, LogLogSlope) {
  const std::vector<double> x = {2, 4, 8}, y = {3, 24, 192};
  EXPECT_NEAR(*cli::loglog_slope(x, y), 3.0, 1e-12);
  EXPECT_FALSE(cli::loglog_slope(std::vector<double>{1}, std::vector<double>{1}).has_value());
}
