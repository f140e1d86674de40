#include "hhsar/simulator.hpp"

#include <cmath>
#include <string>

#include "hhsar/errors.hpp"
#include "hhsar/parallel.hpp"

namespace hhsar {

DataCube::DataCube(SyntheticAperture ap, FrequencyGrid freqs)
    : aperture(std::move(ap)), frequencies(freqs), values(aperture.size() * frequencies.count()) {}

DataCube simulate_measurement(const Scene& scene, const SyntheticAperture& aperture,
                              const FrequencyGrid& freqs) {
  aperture.validate();
  DataCube cube(aperture, freqs);
  const std::size_t nf = freqs.count();
  std::vector<double> k(nf);
  for (std::size_t i = 0; i < nf; ++i) k[i] = freqs.wavenumber(i);

  parallel_for(aperture.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      const Vec3& pe = aperture.elements[e];
      cdouble* row = cube.values.data() + e * nf;
      for (const Scatterer& s : scene.scatterers) {
        const double r = (s.position - pe).norm();
        if (!(r > 0.0)) {
          throw DomainError("scatterer coincides with aperture element " + std::to_string(e));
        }
        for (std::size_t i = 0; i < nf; ++i) {
          row[i] += s.reflectivity * std::polar(1.0, -2.0 * k[i] * r);
        }
      }
    }
  });
  return cube;
}

std::size_t star_points_per_spoke(const StarSpec& spec) {
  const double radius = 0.5 * spec.diameter;
  const double wedge = kPi / spec.spokes;
  const auto rings = static_cast<std::size_t>(std::floor(radius * spec.density));
  std::size_t total = 0;
  for (std::size_t i = 0; i < rings; ++i) {
    const double r = (static_cast<double>(i) + 0.5) / spec.density;
    total += std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(r * wedge * spec.density)));
  }
  return total;
}

namespace {

std::vector<Scatterer> grid_points(const PointGridSpec& spec) {
  for (int c : spec.counts) {
    if (c < 1) throw ConfigError("point grid counts must be >= 1");
  }
  if (spec.spacing < 0.0) throw ConfigError("point grid spacing must be non-negative");
  std::vector<Scatterer> pts;
  for (int iz = 0; iz < spec.counts[2]; ++iz) {
    for (int iy = 0; iy < spec.counts[1]; ++iy) {
      for (int ix = 0; ix < spec.counts[0]; ++ix) {
        const Vec3 offset((ix - 0.5 * (spec.counts[0] - 1)) * spec.spacing,
                          (iy - 0.5 * (spec.counts[1] - 1)) * spec.spacing,
                          (iz - 0.5 * (spec.counts[2] - 1)) * spec.spacing);
        pts.push_back({spec.center + offset, {1.0, 0.0}});
      }
    }
  }
  return pts;
}

std::vector<Scatterer> star_points(const StarSpec& spec) {
  if (!(spec.diameter > 0.0) || spec.spokes < 1 || !(spec.density > 0.0)) {
    throw ConfigError("star spec needs positive diameter, spokes and density");
  }
  const double radius = 0.5 * spec.diameter;
  const double period = 2.0 * kPi / spec.spokes;
  const double wedge = 0.5 * period;
  const auto rings = static_cast<std::size_t>(std::floor(radius * spec.density));
  std::vector<Scatterer> pts;
  for (int s = 0; s < spec.spokes; ++s) {
    const double start = s * period;
    for (std::size_t i = 0; i < rings; ++i) {
      const double r = (static_cast<double>(i) + 0.5) / spec.density;
      const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(r * wedge * spec.density)));
      for (std::size_t j = 0; j < count; ++j) {
        const double phi = start + wedge * (static_cast<double>(j) + 0.5) / static_cast<double>(count);
        pts.push_back({spec.center + Vec3(r * std::cos(phi), r * std::sin(phi), 0.0), {1.0, 0.0}});
      }
    }
  }
  return pts;
}

}  // namespace

Scene scene_from_spec(const SceneSpec& spec, const ImagingRegion& region) {
  Scene scene;
  scene.scatterers = std::visit(
      [](const auto& s) -> std::vector<Scatterer> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointGridSpec>) {
          return grid_points(s);
        } else if constexpr (std::is_same_v<T, StarSpec>) {
          return star_points(s);
        } else {
          return s.points;
        }
      },
      spec);
  for (const Scatterer& s : scene.scatterers) {
    if (!region.contains(s.position, 1e-12)) {
      throw ConfigError("scatterer at (" + std::to_string(s.position.x()) + ", " + std::to_string(s.position.y()) +
                        ", " + std::to_string(s.position.z()) + ") lies outside the imaging region");
    }
  }
  return scene;
}

}  // namespace hhsar
