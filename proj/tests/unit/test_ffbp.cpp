#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/LU>
#include <memory>

#include "desk.hpp"
#include "hhsar/bpa.hpp"
#include "hhsar/errors.hpp"
#include "hhsar/ffbp.hpp"

using namespace hhsar;

namespace {

struct Small {
  SyntheticAperture aperture = generate_handheld_aperture(16, 16, 0.08, JitterSpec{0.004, 0.0003, 0.3}, 7);
  FrequencyGrid freqs{12e9, 15e9, 16};
  ImagingRegion region{-0.04, 0.04, -0.04, 0.04, 0.14, 0.22};
  std::array<std::size_t, 3> dims{17, 17, 9};
};

double rel_rms(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST(FfbpParams, KernelNamesAndLevels) {
  EXPECT_EQ(parse_kernel("linear"), InterpKernel::Linear);
  EXPECT_EQ(parse_kernel("cubic"), InterpKernel::Cubic);
  EXPECT_EQ(to_string(InterpKernel::Cubic), "cubic");
  EXPECT_THROW(parse_kernel("sinc"), ConfigError);
  EXPECT_EQ(default_levels(101), 4);
  EXPECT_EQ(default_levels(33), 3);
  EXPECT_EQ(default_levels(4), 1);
  FfbpParams p;
  p.oversample = 0.5;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(SubimageGrid, PositionsInvertLatticePoints) {
  const Small s;
  const auto grid = build_subimage_grid(s.aperture, IndexRange{0, 64}, s.region, s.freqs, 1.4);
  ASSERT_GT(grid.valid_count, 0u);
  const auto ext = s.aperture.extents(IndexRange{0, 64});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.valid[i]) continue;
    const Vec3 back = llt_forward(ext, grid.positions[i], s.freqs);
    EXPECT_LE((back - grid.lattice_point(i)).lpNorm<Eigen::Infinity>(), 1e-9) << i;
  }
}

TEST(SubimageGrid, NarrowerSubarrayNeedsFewerAzimuthSamples) {
  const Small s;
  const SubarrayExtents wide{-0.04, 0.04, -0.01, 0.01};
  const SubarrayExtents narrow{-0.02, 0.02, -0.01, 0.01};
  const auto a = subimage_lattice(wide, s.region, s.freqs, 1.4);
  const auto b = subimage_lattice(narrow, s.region, s.freqs, 1.4);
  EXPECT_LT(b[0].count, a[0].count);
  EXPECT_EQ(b[1].count, a[1].count);
}

TEST(SubimageGrid, InRegionCountMatchesJacobianIntegral) {
  const Small s;
  const IndexRange all{0, s.aperture.size()};
  const LocalSpectrum model(s.aperture.extents(all), s.freqs.k_min(), s.freqs.k_max());
  // Midpoint rule for the integral of |det J| over the region: the number of
  // unit-spaced (u, v, n) nodes that map into it.
  const int q = 12;
  double integral = 0.0;
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      for (int k = 0; k < q; ++k) {
        const Vec3 p(s.region.x_min + (i + 0.5) / q * s.region.extent_x(),
                     s.region.y_min + (j + 0.5) / q * s.region.extent_y(),
                     s.region.z_min + (k + 0.5) / q * s.region.extent_z());
        integral += std::abs(model.forward_jacobian(p).determinant());
      }
    }
  }
  integral *= s.region.volume() / (q * q * q);
  for (double gamma : {3.0, 4.0}) {
    const auto grid = build_subimage_grid(s.aperture, all, s.region, s.freqs, gamma, 0.0);
    const double expect = integral * gamma * gamma * gamma;
    EXPECT_NEAR(static_cast<double>(grid.count_inside(s.region)) / expect, 1.0, 0.15) << gamma;
  }
}

TEST(Merge, IdenticalGridsWithoutDownconversionAdd) {
  const Small s;
  auto grid = std::make_shared<const SubimageGrid>(
      build_subimage_grid(s.aperture, IndexRange{0, 64}, s.region, s.freqs, 1.4));
  Subimage a{grid, std::vector<cdouble>(grid->size(), cdouble(1.0, 2.0)), false};
  Subimage b{grid, std::vector<cdouble>(grid->size(), cdouble(-0.5, 0.25)), false};
  for (std::size_t i = 0; i < grid->size(); ++i) a.values[i] *= 1.0 + 0.01 * static_cast<double>(i % 7);
  std::vector<Vec3> pts;
  std::vector<cdouble> expect;
  for (std::size_t i = 0; i < grid->size(); i += 17) {
    if (!grid->valid[i]) continue;
    pts.push_back(grid->positions[i]);
    expect.push_back(a.values[i] + b.values[i]);
  }
  MergeOptions opt;
  opt.spatial_downconversion = false;
  MergeStats stats;
  const auto got = merge_onto(a, b, pts, {}, s.freqs, opt, &stats);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT(std::abs(got[i] - expect[i]), 1e-6) << i;
  EXPECT_EQ(stats.evaluated, pts.size());
}

TEST(Merge, ReproducesConstantsOffNode) {
  const Small s;
  const ImagingRegion inner{-0.02, 0.02, -0.02, 0.02, 0.16, 0.2};
  auto grid = std::make_shared<const SubimageGrid>(
      build_subimage_grid(s.aperture, IndexRange{0, s.aperture.size()}, s.region, s.freqs, 1.4, 1.0));
  for (auto kernel : {InterpKernel::Linear, InterpKernel::Cubic}) {
    const Subimage a{grid, std::vector<cdouble>(grid->size(), cdouble(3.0, -1.0)), true};
    const Subimage zero{grid, std::vector<cdouble>(grid->size()), true};
    const auto pts = CartesianGrid::spanning(inner, {5, 5, 3}).points();
    MergeOptions opt;
    opt.kernel = kernel;
    opt.spatial_downconversion = false;
    MergeStats stats;
    const auto got = merge_onto(a, zero, pts, {}, s.freqs, opt, &stats);
    EXPECT_EQ(stats.flagged, 0u);
    for (const auto& v : got) EXPECT_LT(std::abs(v - cdouble(3.0, -1.0)), 1e-9);
  }
}

TEST(Merge, LevelTwoMatchesDirectBackprojection) {
  const Small s;
  const Vec3 target(0.005, -0.004, 0.18);
  const auto cube = simulate_measurement(Scene{{{target, {1, 0}}}}, s.aperture, s.freqs);
  const auto prof = range_compress(cube);
  const IndexRange left{0, 128}, right{128, 256};
  const std::vector<Vec3> demand = {target, target + Vec3(0.002, 0.001, 0.0)};
  auto child = [&](IndexRange r) {
    auto g = std::make_shared<const SubimageGrid>(
        build_demand_grid(s.aperture, r, s.freqs, 2.5, InterpKernel::Cubic, demand));
    return level1_reconstruct(prof, g);
  };
  MergeOptions opt;
  opt.kernel = InterpKernel::Cubic;
  const auto got = merge_onto(child(left), child(right), demand, {}, s.freqs, opt);
  const auto ref = backproject(prof, IndexRange{0, 256}, demand);
  EXPECT_LT(std::abs(got[0] - ref[0]), 0.01 * std::abs(ref[0]));
  EXPECT_LT(std::abs(got[1] - ref[1]), 0.03 * std::abs(ref[0]));
}

TEST(Merge, RejectsUnrelatedParent) {
  const Small s;
  auto g = [&](IndexRange r) {
    return std::make_shared<const SubimageGrid>(build_subimage_grid(s.aperture, r, s.region, s.freqs, 1.4));
  };
  const Subimage a{g({0, 64}), {}, false}, b{g({64, 128}), {}, false};
  EXPECT_THROW(merge_pair(a, b, g({0, 256}), s.freqs), ConfigError);
}

TEST(Hhffbpa, SingleLevelEqualsBpa) {
  const Small s;
  const auto scene = scene_from_spec(PointGridSpec{{2, 2, 2}, 0.03, s.region.center()}, s.region);
  const auto cube = simulate_measurement(scene, s.aperture, s.freqs);
  FfbpParams p;
  p.levels = 1;
  const auto fast = hhffbpa_reconstruct(cube, s.region, s.dims, p);
  const auto ref = bpa_reconstruct(cube, s.region, s.dims);
  EXPECT_LT(rel_rms(fast.values, ref.values), 1e-6);
  EXPECT_EQ(fast.grid, ref.grid);
}

TEST(Hhffbpa, IsLinearInTheData) {
  const Small s;
  const auto sa = simulate_measurement(Scene{{{Vec3(0.01, 0, 0.17), {1, 0}}}}, s.aperture, s.freqs);
  const auto sb = simulate_measurement(Scene{{{Vec3(-0.02, 0.01, 0.2), {0, 2}}}}, s.aperture, s.freqs);
  DataCube sum = sa;
  for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += sb.values[i];
  FfbpParams p;
  p.levels = 3;
  const auto ia = hhffbpa_reconstruct(sa, s.region, s.dims, p);
  const auto ib = hhffbpa_reconstruct(sb, s.region, s.dims, p);
  FfbpReport rep;
  const auto is = hhffbpa_reconstruct(sum, s.region, s.dims, p, &rep);
  std::vector<cdouble> added(ia.values.size());
  for (std::size_t i = 0; i < added.size(); ++i) added[i] = ia.values[i] + ib.values[i];
  EXPECT_LT(rel_rms(is.values, added), 1e-9);
  EXPECT_EQ(rep.levels.size(), 3u);
  EXPECT_EQ(is.provenance.at("algorithm"), "hhffbpa");
}

TEST(Hhffbpa, RejectsRegionInsideFactorizationDomain) {
  const Small s;
  const ImagingRegion near{-0.04, 0.04, -0.04, 0.04, 0.01, 0.05};
  const auto tree = partition_subarrays(s.aperture, 2);
  EXPECT_THROW(check_factorization_domain(s.aperture, tree, near), DomainError);
  EXPECT_NO_THROW(check_factorization_domain(s.aperture, tree, s.region));
}
