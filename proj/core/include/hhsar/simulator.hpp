#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "hhsar/model.hpp"

namespace hhsar {

/// Measured stepped-frequency signal s(p', k), row-major (element, frequency).
struct DataCube {
  SyntheticAperture aperture;
  FrequencyGrid frequencies;
  std::vector<cdouble> values;

  DataCube(SyntheticAperture ap, FrequencyGrid freqs);

  std::size_t element_count() const { return aperture.size(); }
  std::size_t frequency_count() const { return frequencies.count(); }
  cdouble& at(std::size_t element, std::size_t freq) { return values[element * frequencies.count() + freq]; }
  const cdouble& at(std::size_t element, std::size_t freq) const {
    return values[element * frequencies.count() + freq];
  }
};

/// First-order Born model without propagation loss:
/// s(p', k) = sum_i f_i exp(-j 2k |p_i - p'|).
/// Throws DomainError if a scatterer coincides with an element.
DataCube simulate_measurement(const Scene& scene, const SyntheticAperture& aperture,
                              const FrequencyGrid& freqs);

/// nx x ny x nz lattice of unit scatterers centred on `center`.
struct PointGridSpec {
  std::array<int, 3> counts{1, 1, 1};
  double spacing = 0.0;
  Vec3 center = Vec3::Zero();
};

/// Siemens star in the plane z = center.z(), approximated by a dense point
/// cloud over its metal sectors. Sample rings sit at radii (i + 1/2)/density,
/// and each ring contributes ceil(r * wedge_angle * density) points per spoke.
struct StarSpec {
  Vec3 center = Vec3::Zero();
  double diameter = 0.0;
  int spokes = 8;
  double density = 0.0;  // samples per metre
};

/// Explicit list of scatterers.
struct PointListSpec {
  std::vector<Scatterer> points;
};

using SceneSpec = std::variant<PointGridSpec, StarSpec, PointListSpec>;

/// Number of points one spoke of `spec` contributes.
std::size_t star_points_per_spoke(const StarSpec& spec);

/// Builds the scatterer list; throws ConfigError when any point falls outside
/// `region`.
Scene scene_from_spec(const SceneSpec& spec, const ImagingRegion& region);

}  // namespace hhsar
