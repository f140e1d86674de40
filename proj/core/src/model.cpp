#include "hhsar/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "hhsar/errors.hpp"

namespace hhsar {

FrequencyGrid::FrequencyGrid(double f_min, double f_max, std::size_t count)
    : f_min_(f_min), f_max_(f_max), count_(count) {
  if (!(f_min > 0.0) || !(f_max > f_min)) {
    throw ConfigError("frequency grid requires 0 < f_min < f_max");
  }
  if (count < 2) {
    throw ConfigError("frequency grid requires at least 2 samples");
  }
}

double SubarrayExtents::half_diagonal() const {
  return 0.5 * std::hypot(width(), height());
}

SubarrayExtents SyntheticAperture::extents() const {
  return extents(IndexRange{0, elements.size()});
}

SubarrayExtents SyntheticAperture::extents(IndexRange range) const {
  if (range.size() == 0 || range.end > elements.size()) {
    throw ConfigError("subarray range is empty or exceeds the aperture");
  }
  SubarrayExtents e{elements[range.begin].x(), elements[range.begin].x(), elements[range.begin].y(),
                    elements[range.begin].y()};
  for (std::size_t i = range.begin + 1; i < range.end; ++i) {
    const Vec3& p = elements[i];
    e.x_min = std::min(e.x_min, p.x());
    e.x_max = std::max(e.x_max, p.x());
    e.y_min = std::min(e.y_min, p.y());
    e.y_max = std::max(e.y_max, p.y());
  }
  return e;
}

double SyntheticAperture::max_depth() const {
  double z = -std::numeric_limits<double>::infinity();
  for (const Vec3& p : elements) z = std::max(z, p.z());
  return z;
}

void SyntheticAperture::validate() const {
  if (elements.empty()) throw ConfigError("aperture has no elements");
  for (const Vec3& p : elements) {
    if (!p.allFinite()) throw ConfigError("aperture element has non-finite coordinates");
  }
  if (scan_positions * channels != elements.size()) {
    throw ConfigError("aperture scan metadata does not match element count");
  }
}

Vec3 ImagingRegion::center() const {
  return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max), 0.5 * (z_min + z_max)};
}

bool ImagingRegion::contains(const Vec3& p, double tol) const {
  return p.x() >= x_min - tol && p.x() <= x_max + tol && p.y() >= y_min - tol && p.y() <= y_max + tol &&
         p.z() >= z_min - tol && p.z() <= z_max + tol;
}

ImagingRegion ImagingRegion::expanded(double fraction) const {
  ImagingRegion r = *this;
  r.x_min -= fraction * extent_x();
  r.x_max += fraction * extent_x();
  r.y_min -= fraction * extent_y();
  r.y_max += fraction * extent_y();
  r.z_min = std::max(z_min - fraction * extent_z(), 0.5 * z_min);
  r.z_max += fraction * extent_z();
  return r;
}

void ImagingRegion::validate() const {
  const bool finite = std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) &&
                      std::isfinite(y_max) && std::isfinite(z_min) && std::isfinite(z_max);
  if (!finite || !(x_max > x_min) || !(y_max > y_min) || !(z_max > z_min)) {
    throw ConfigError("imaging region must have positive extents on every axis");
  }
  if (!(z_min > 0.0)) {
    throw ConfigError("imaging region must lie in front of the aperture plane (z_min > 0)");
  }
}

void ImagingRegion::validate_against(const SyntheticAperture& aperture) const {
  validate();
  if (!(z_min > aperture.max_depth())) {
    throw ConfigError("imaging region z_min must exceed the largest element depth");
  }
}

namespace {

// Smoothed random walk normalised to max |w| = 1 (all zeros stay zero).
std::vector<double> smooth_walk(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> step(0.0, 1.0);
  std::vector<double> walk(n, 0.0);
  double acc = 0.0;
  for (auto& w : walk) {
    acc += step(rng);
    w = acc;
  }
  const std::size_t half = std::max<std::size_t>(1, n / 20);
  std::vector<double> smooth(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += walk[j];
    smooth[i] = s / static_cast<double>(hi - lo + 1);
  }
  double mean = 0.0;
  for (double v : smooth) mean += v;
  mean /= static_cast<double>(n);
  double peak = 0.0;
  for (double& v : smooth) {
    v -= mean;
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 0.0) {
    for (double& v : smooth) v /= peak;
  }
  return smooth;
}

double nominal(std::size_t i, std::size_t n, double extent) {
  if (n == 1) return 0.0;
  return -0.5 * extent + extent * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

SyntheticAperture generate_handheld_aperture(int nx, int ny, double extent, const JitterSpec& jitter,
                                             std::uint64_t seed) {
  if (nx < 1 || ny < 1) throw ConfigError("aperture needs at least one scan position and one channel");
  if (!(extent > 0.0)) throw ConfigError("aperture extent must be positive");
  if (jitter.depth_amplitude < 0.0 || jitter.lateral_amplitude < 0.0) {
    throw ConfigError("jitter amplitudes must be non-negative");
  }
  if (jitter.tilt_share < 0.0 || jitter.tilt_share > 1.0) {
    throw ConfigError("jitter tilt_share must lie in [0, 1]");
  }

  const auto sx = static_cast<std::size_t>(nx);
  const auto sy = static_cast<std::size_t>(ny);
  std::mt19937_64 rng(seed);
  const std::vector<double> offset = smooth_walk(sx, rng);
  const std::vector<double> tilt = smooth_walk(sx, rng);
  std::uniform_real_distribution<double> lateral(-1.0, 1.0);

  SyntheticAperture ap;
  ap.scan_positions = sx;
  ap.channels = sy;
  ap.elements.reserve(sx * sy);
  const double half = 0.5 * extent;
  for (std::size_t ix = 0; ix < sx; ++ix) {
    for (std::size_t iy = 0; iy < sy; ++iy) {
      const double x0 = nominal(ix, sx, extent);
      const double y0 = nominal(iy, sy, extent);
      const double z = jitter.depth_amplitude *
                       ((1.0 - jitter.tilt_share) * offset[ix] + jitter.tilt_share * tilt[ix] * (y0 / half));
      double x = x0;
      double y = y0;
      if (jitter.lateral_amplitude > 0.0) {
        x += jitter.lateral_amplitude * lateral(rng);
        y += jitter.lateral_amplitude * lateral(rng);
      }
      ap.elements.emplace_back(x, y, z);
    }
  }
  return ap;
}

int max_levels(std::size_t element_count) {
  int m = 1;
  while ((std::size_t{1} << m) <= element_count) ++m;
  return m;
}

SubarrayTree::SubarrayTree(std::size_t element_count, int levels) : element_count_(element_count) {
  if (levels < 1) throw ConfigError("factorization needs at least one level");
  if (element_count == 0) throw ConfigError("cannot partition an empty aperture");
  if (levels > max_levels(element_count)) {
    throw ConfigError("factorization level " + std::to_string(levels) + " too large for " +
                      std::to_string(element_count) + " elements");
  }
  const std::size_t parts = std::size_t{1} << (levels - 1);
  const std::size_t base = element_count / parts;
  const std::size_t extra = element_count % parts;

  std::vector<IndexRange> first;
  first.reserve(parts);
  std::size_t cursor = 0;
  for (std::size_t n = 0; n < parts; ++n) {
    const std::size_t size = base + (n < extra ? 1 : 0);
    first.push_back({cursor, cursor + size});
    cursor += size;
  }
  levels_.push_back(std::move(first));
  for (int m = 2; m <= levels; ++m) {
    const auto& below = levels_.back();
    std::vector<IndexRange> next;
    next.reserve(below.size() / 2);
    for (std::size_t n = 0; n + 1 < below.size(); n += 2) {
      next.push_back({below[n].begin, below[n + 1].end});
    }
    levels_.push_back(std::move(next));
  }
}

SubarrayTree partition_subarrays(const SyntheticAperture& aperture, int levels) {
  return SubarrayTree(aperture.size(), levels);
}

}  // namespace hhsar
