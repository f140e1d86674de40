#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hhsar/bpa.hpp"
#include "hhsar/model.hpp"

namespace hhsar {

struct PsfReport {
  double mainlobe_width = 0.0;  // metres, between -3 dB crossings
  double pslr = 0.0;            // dB
  double islr = 0.0;            // dB
  double peak_position = 0.0;   // metres from the first sample (index * spacing)
  std::size_t peak_index = 0;
};

/// Point-spread metrics of a 1-D cut. The profile is treated as circular.
/// Throws DomainError when no null is found on either side of the peak.
PsfReport psf_metrics(std::span<const cdouble> profile, double spacing);

inline constexpr double kPsnrCap = 200.0;

/// PSNR of `test` against `reference` after a least-squares complex gain fit.
/// Capped at kPsnrCap. Throws ConfigError on grid mismatch.
double psnr(const ImageVolume& reference, const ImageVolume& test);
double psnr(std::span<const cdouble> reference, std::span<const cdouble> test);

enum class Axis { X = 0, Y = 1, Z = 2 };

Axis parse_axis(char name);

/// Row-major real image; rows run top to bottom.
struct Image2D {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  double& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

/// Maximum of |f| along `axis`, normalised to the volume peak, mapped from
/// [floor_db, 0] dB onto [0, 1]. Rows follow the second remaining axis,
/// columns the first (x/y for a z projection).
Image2D max_intensity_projection(const ImageVolume& volume, Axis axis, double floor_db = -40.0);

/// 1-D cut through the volume along `axis` at grid indices (i0, i1) of the
/// other two axes in x, y, z order.
std::vector<cdouble> extract_cut(const ImageVolume& volume, Axis axis, std::size_t i0, std::size_t i1);

}  // namespace hhsar
