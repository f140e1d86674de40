#pragma once

#include <array>

#include "hhsar/model.hpp"
#include "hhsar/simulator.hpp"

namespace hhsar::testing {

// Scaled point-scatterer scene: 33x33 elements over 0.15 m, 12-15 GHz.
struct DeskScene {
  SyntheticAperture aperture;
  FrequencyGrid frequencies{12e9, 15e9, 16};
  ImagingRegion region{-0.096, 0.096, -0.096, 0.096, 0.11, 0.29};
  std::array<std::size_t, 3> dims{65, 65, 33};
  Scene scene;
  // Grid indices of the centre and squint scatterers (x, y, z).
  std::array<std::size_t, 3> center_index{32, 32, 16};
  std::array<std::size_t, 3> squint_index{12, 32, 16};
  double psf_half_window = 0.03;
};

inline DeskScene make_desk_scene(std::uint64_t seed = 1) {
  DeskScene d;
  d.aperture = generate_handheld_aperture(33, 33, 0.15, JitterSpec{0.0133, 0.0005, 0.3}, seed);
  d.scene = scene_from_spec(PointGridSpec{{3, 3, 3}, 0.06, Vec3(0.0, 0.0, 0.2)}, d.region);
  return d;
}

}  // namespace hhsar::testing
