#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hhsar/errors.hpp"
#include "hhsar/rangecomp.hpp"

using namespace hhsar;

namespace {

// Direct evaluation of the delay profile: sum_m S_m exp(j 2 pi f_m tau).
cdouble direct_profile(const DataCube& cube, std::size_t e, double tau) {
  cdouble acc{};
  for (std::size_t m = 0; m < cube.frequency_count(); ++m) {
    acc += cube.at(e, m) * std::exp(cdouble(0, 2 * kPi * cube.frequencies.frequency(m) * tau));
  }
  return acc;
}

DataCube random_cube(std::uint64_t seed) {
  SyntheticAperture ap = generate_handheld_aperture(2, 2, 0.05, {}, 1);
  DataCube cube(ap, FrequencyGrid(12e9, 15e9, 16));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  for (auto& v : cube.values) v = {n(rng), n(rng)};
  return cube;
}

}  // namespace

TEST(RangeCompress, MatchesDirectSumOnSampleGrid) {
  const auto cube = random_cube(7);
  const auto prof = range_compress(cube, 8);
  EXPECT_EQ(prof.length(), 128u);
  EXPECT_NEAR(prof.dt() * prof.length(), 1.0 / cube.frequencies.delta_f(), 1e-18);
  for (std::size_t e = 0; e < cube.element_count(); ++e) {
    for (std::size_t i = 0; i < prof.length(); i += 5) {
      const double tau = i * prof.dt();
      const cdouble ref = direct_profile(cube, e, tau);
      EXPECT_LT(std::abs(prof.sample(e, tau) - ref), 1e-9 * (1 + std::abs(ref))) << "e=" << e << " i=" << i;
    }
  }
}

TEST(RangeCompress, InterpolatesBetweenSamples) {
  const auto cube = random_cube(9);
  const auto coarse = range_compress(cube, 8);
  const auto fine = range_compress(cube, 64);
  double err8 = 0, err64 = 0, norm = 0;
  for (double tau = 0.0; tau < coarse.window_end(); tau += coarse.window_end() / 997) {
    const cdouble ref = direct_profile(cube, 0, tau);
    err8 += std::norm(coarse.sample(0, tau) - ref);
    err64 += std::norm(fine.sample(0, tau) - ref);
    norm += std::norm(ref);
  }
  EXPECT_LT(std::sqrt(err8 / norm), 0.05);
  EXPECT_LT(err64, err8 / 30);  // second-order convergence of linear interpolation
}

TEST(RangeCompress, PointTargetPeaksAtRoundTripDelay) {
  SyntheticAperture ap = generate_handheld_aperture(1, 1, 0.01, {}, 1);
  const FrequencyGrid fg(12e9, 15e9, 32);
  const Vec3 target(0.0, 0.0, 0.4);
  const auto cube = simulate_measurement(Scene{{{target, {1, 0}}}}, ap, fg);
  const auto prof = range_compress(cube, 16);
  const double tau0 = 2 * 0.4 / kSpeedOfLight;
  EXPECT_NEAR(std::abs(prof.sample(0, tau0)), 32.0, 0.32);
  const auto env = prof.envelope(0);
  std::size_t best = 0;
  for (std::size_t i = 1; i < env.size(); ++i) {
    if (std::abs(env[i]) > std::abs(env[best])) best = i;
  }
  EXPECT_NEAR(best * prof.dt(), tau0, prof.dt());
}

TEST(RangeCompress, OutOfWindowDelayThrows) {
  const auto prof = range_compress(random_cube(1), 4);
  EXPECT_THROW(prof.sample(0, -1e-12), OutOfWindowError);
  EXPECT_THROW(prof.sample(0, prof.window_end() * 1.001), OutOfWindowError);
  cdouble out;
  EXPECT_FALSE(prof.sample_range(0, -0.1, out));
}
