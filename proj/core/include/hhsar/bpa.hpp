#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hhsar/model.hpp"
#include "hhsar/rangecomp.hpp"
#include "hhsar/simulator.hpp"

namespace hhsar {

/// Uniform Cartesian sampling lattice; x varies fastest in linear order.
struct CartesianGrid {
  Vec3 origin = Vec3::Zero();
  Vec3 step = Vec3::Ones();
  std::array<std::size_t, 3> dims{1, 1, 1};

  /// Grid spanning `region` corner to corner (single samples sit at the centre).
  static CartesianGrid spanning(const ImagingRegion& region, std::array<std::size_t, 3> dims);

  std::size_t size() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return (iz * dims[1] + iy) * dims[0] + ix;
  }
  Vec3 point(std::size_t ix, std::size_t iy, std::size_t iz) const;
  std::vector<Vec3> points() const;
  friend bool operator==(const CartesianGrid&, const CartesianGrid&) = default;
};

/// Complex reflectivity on a Cartesian grid.
struct ImageVolume {
  CartesianGrid grid;
  std::vector<cdouble> values;
  /// Free-form provenance (algorithm name, parameters, timings).
  std::map<std::string, std::string> provenance;

  const cdouble& at(std::size_t ix, std::size_t iy, std::size_t iz) const { return values[grid.index(ix, iy, iz)]; }
};

/// Sum of delay-matched profile samples over `elements` for every point.
/// Throws OutOfWindowError when any delay leaves the profile window.
std::vector<cdouble> backproject(const RangeProfileSet& profiles, IndexRange elements,
                                 std::span<const Vec3> points);
std::vector<cdouble> backproject(const RangeProfileSet& profiles, std::span<const std::size_t> elements,
                                 std::span<const Vec3> points);

/// Range compression followed by backprojection over the full aperture on
/// the Cartesian grid spanning `region`.
ImageVolume bpa_reconstruct(const DataCube& cube, const ImagingRegion& region, std::array<std::size_t, 3> dims,
                            int upsample = 8);

}  // namespace hhsar
