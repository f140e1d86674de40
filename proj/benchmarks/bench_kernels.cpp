#include <benchmark/benchmark.h>

#include "hhsar/bpa.hpp"
#include "hhsar/ffbp.hpp"
#include "hhsar/rangecomp.hpp"
#include "hhsar/simulator.hpp"
#include "hhsar/spectrum.hpp"

using namespace hhsar;

namespace {

struct Fixture {
  SyntheticAperture aperture;
  FrequencyGrid freqs{12e9, 15e9, 16};
  ImagingRegion region{-0.096, 0.096, -0.096, 0.096, 0.11, 0.29};
  DataCube cube;

  explicit Fixture(int side)
      : aperture(generate_handheld_aperture(side, side, 0.15 * (side - 1) / 32.0, JitterSpec{0.01, 0.0005, 0.3}, 1)),
        cube(simulate_measurement(Scene{{{Vec3(0.0, 0.0, 0.2), {1, 0}}}}, aperture, freqs)) {}
};

void BM_RangeCompress(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(range_compress(f.cube));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.aperture.size()));
}
BENCHMARK(BM_RangeCompress)->Arg(17)->Arg(33);

void BM_Backproject(benchmark::State& state) {
  const Fixture f(33);
  const auto prof = range_compress(f.cube);
  const auto pts = CartesianGrid::spanning(f.region, {17, 17, 9}).points();
  for (auto _ : state) benchmark::DoNotOptimize(backproject(prof, IndexRange{0, f.aperture.size()}, pts));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size() * f.aperture.size()));
}
BENCHMARK(BM_Backproject)->Unit(benchmark::kMillisecond);

void BM_LltInvert(benchmark::State& state) {
  const Fixture f(33);
  const auto ext = f.aperture.extents(IndexRange{0, 136});
  const Vec3 p(0.02, -0.01, 0.2);
  const Vec3 target = llt_forward(ext, p, f.freqs);
  for (auto _ : state) benchmark::DoNotOptimize(llt_invert(ext, target, p + Vec3(0.005, 0.005, -0.005), f.freqs));
}
BENCHMARK(BM_LltInvert);

void BM_SubimageGrid(benchmark::State& state) {
  const Fixture f(33);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_subimage_grid(f.aperture, IndexRange{0, 136}, f.region, f.freqs, 1.4));
  }
}
BENCHMARK(BM_SubimageGrid)->Unit(benchmark::kMillisecond);

void BM_Hhffbpa(benchmark::State& state) {
  const Fixture f(33);
  FfbpParams p;
  p.levels = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hhffbpa_reconstruct(f.cube, f.region, {33, 33, 17}, p));
}
BENCHMARK(BM_Hhffbpa)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
