#include "hhsar/bpa.hpp"

#include <chrono>
#include <string>

#include "hhsar/errors.hpp"
#include "hhsar/parallel.hpp"

namespace hhsar {

CartesianGrid CartesianGrid::spanning(const ImagingRegion& region, std::array<std::size_t, 3> dims) {
  for (std::size_t d : dims) {
    if (d < 1) throw ConfigError("grid dimensions must be >= 1");
  }
  CartesianGrid g;
  g.dims = dims;
  const std::array<double, 3> lo{region.x_min, region.y_min, region.z_min};
  const std::array<double, 3> hi{region.x_max, region.y_max, region.z_max};
  for (int a = 0; a < 3; ++a) {
    if (dims[a] == 1) {
      g.origin[a] = 0.5 * (lo[a] + hi[a]);
      g.step[a] = hi[a] - lo[a];
    } else {
      g.origin[a] = lo[a];
      g.step[a] = (hi[a] - lo[a]) / static_cast<double>(dims[a] - 1);
    }
  }
  return g;
}

Vec3 CartesianGrid::point(std::size_t ix, std::size_t iy, std::size_t iz) const {
  return origin + Vec3(step.x() * static_cast<double>(ix), step.y() * static_cast<double>(iy),
                       step.z() * static_cast<double>(iz));
}

std::vector<Vec3> CartesianGrid::points() const {
  std::vector<Vec3> pts;
  pts.reserve(size());
  for (std::size_t iz = 0; iz < dims[2]; ++iz)
    for (std::size_t iy = 0; iy < dims[1]; ++iy)
      for (std::size_t ix = 0; ix < dims[0]; ++ix) pts.push_back(point(ix, iy, iz));
  return pts;
}

namespace {

[[noreturn]] void out_of_window(std::size_t element, const Vec3& p) {
  throw OutOfWindowError("delay from element " + std::to_string(element) + " to point (" + std::to_string(p.x()) +
                         ", " + std::to_string(p.y()) + ", " + std::to_string(p.z()) +
                         ") exceeds the range profile window");
}

template <typename ElementAt>
std::vector<cdouble> backproject_impl(const RangeProfileSet& profiles, std::size_t count, ElementAt element_at,
                                      std::span<const Vec3> points) {
  const auto& pos = profiles.positions();
  std::vector<cdouble> out(points.size());
  parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 p = points[i];
      cdouble acc{};
      for (std::size_t j = 0; j < count; ++j) {
        const std::size_t e = element_at(j);
        const double r = (p - pos[e]).norm();
        cdouble v;
        if (!profiles.sample_range(e, r, v)) out_of_window(e, p);
        acc += v;
      }
      out[i] = acc;
    }
  });
  return out;
}

}  // namespace

std::vector<cdouble> backproject(const RangeProfileSet& profiles, IndexRange elements,
                                 std::span<const Vec3> points) {
  if (elements.end > profiles.element_count()) throw ConfigError("element range exceeds profile set");
  return backproject_impl(
      profiles, elements.size(), [b = elements.begin](std::size_t j) { return b + j; }, points);
}

std::vector<cdouble> backproject(const RangeProfileSet& profiles, std::span<const std::size_t> elements,
                                 std::span<const Vec3> points) {
  for (std::size_t e : elements) {
    if (e >= profiles.element_count()) throw ConfigError("element index exceeds profile set");
  }
  return backproject_impl(
      profiles, elements.size(), [elements](std::size_t j) { return elements[j]; }, points);
}

ImageVolume bpa_reconstruct(const DataCube& cube, const ImagingRegion& region, std::array<std::size_t, 3> dims,
                            int upsample) {
  region.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const RangeProfileSet profiles = range_compress(cube, upsample);
  ImageVolume vol;
  vol.grid = CartesianGrid::spanning(region, dims);
  const std::vector<Vec3> pts = vol.grid.points();
  vol.values = backproject(profiles, IndexRange{0, cube.element_count()}, pts);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  vol.provenance["algorithm"] = "bpa";
  vol.provenance["upsample"] = std::to_string(upsample);
  vol.provenance["seconds"] = std::to_string(seconds);
  return vol;
}

}  // namespace hhsar
