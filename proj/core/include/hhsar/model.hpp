#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace hhsar {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using cdouble = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

/// Equidistant stepped-frequency sweep.
class FrequencyGrid {
 public:
  FrequencyGrid(double f_min, double f_max, std::size_t count);

  double f_min() const { return f_min_; }
  double f_max() const { return f_max_; }
  std::size_t count() const { return count_; }
  double delta_f() const { return (f_max_ - f_min_) / static_cast<double>(count_ - 1); }

  double frequency(std::size_t i) const { return f_min_ + static_cast<double>(i) * delta_f(); }
  double wavenumber(std::size_t i) const { return 2.0 * kPi * frequency(i) / kSpeedOfLight; }
  double k_min() const { return 2.0 * kPi * f_min_ / kSpeedOfLight; }
  double k_max() const { return 2.0 * kPi * f_max_ / kSpeedOfLight; }
  double delta_k() const { return 2.0 * kPi * delta_f() / kSpeedOfLight; }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  double f_min_;
  double f_max_;
  std::size_t count_;
};

/// Axis-aligned bounds of a set of element positions in the aperture plane.
/// Depth is ignored: the local-spectrum model places every element at z' = 0.
struct SubarrayExtents {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double half_diagonal() const;
};

/// Half-open range [begin, end) into the aperture's ordered element list.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Ordered antenna phase centers of a (possibly irregular) synthetic array.
///
/// Elements are stored row-major over scan positions x array elements: the
/// element at scan position `s` and array channel `c` is at `s * channels + c`.
struct SyntheticAperture {
  std::vector<Vec3> elements;
  std::size_t scan_positions = 0;
  std::size_t channels = 0;

  std::size_t size() const { return elements.size(); }
  SubarrayExtents extents() const;
  SubarrayExtents extents(IndexRange range) const;
  double max_depth() const;
  void validate() const;
};

struct ImagingRegion {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double z_min = 0.0, z_max = 0.0;

  double extent_x() const { return x_max - x_min; }
  double extent_y() const { return y_max - y_min; }
  double extent_z() const { return z_max - z_min; }
  double volume() const { return extent_x() * extent_y() * extent_z(); }
  Vec3 center() const;
  bool contains(const Vec3& p, double tol = 0.0) const;

  /// Grows every face outward by `fraction` of the corresponding extent.
  /// The near face is never moved closer than half its original depth.
  ImagingRegion expanded(double fraction) const;

  /// Throws ConfigError for empty extents or a region not strictly in front
  /// of the aperture plane.
  void validate() const;
  void validate_against(const SyntheticAperture& aperture) const;
};

struct Scatterer {
  Vec3 position;
  cdouble reflectivity{1.0, 0.0};
};

struct Scene {
  std::vector<Scatterer> scatterers;
};

/// Trajectory perturbation of a manual raster scan.
struct JitterSpec {
  /// Bound on |z'| of every element.
  double depth_amplitude = 0.0;
  /// Bound on the per-element uniform noise added to x' and y'.
  double lateral_amplitude = 0.0;
  /// Share of the depth budget spent on array tilt (angle fluctuation about
  /// the scan axis) rather than a rigid depth offset. In [0, 1].
  double tilt_share = 0.3;
};

/// Linear array of `ny` channels along y, scanned over `nx` positions along x,
/// covering an `extent` x `extent` nominal aperture centred on the origin.
/// Depth jitter is a smoothed random walk per scan position (offset plus tilt);
/// lateral jitter is independent bounded noise per element.
SyntheticAperture generate_handheld_aperture(int nx, int ny, double extent, const JitterSpec& jitter,
                                             std::uint64_t seed);

/// Binary merge tree over contiguous runs of the scan order.
///
/// Levels are numbered 1..M. Level 1 holds 2^(M-1) balanced runs; the
/// subarray n at level m is the union of subarrays 2n and 2n+1 at level m-1
/// (zero-based). Level M is the whole aperture.
class SubarrayTree {
 public:
  SubarrayTree(std::size_t element_count, int levels);

  int levels() const { return static_cast<int>(levels_.size()); }
  std::size_t element_count() const { return element_count_; }
  const std::vector<IndexRange>& level(int m) const { return levels_.at(static_cast<std::size_t>(m - 1)); }
  std::array<std::size_t, 2> children(std::size_t n) const { return {2 * n, 2 * n + 1}; }

 private:
  std::size_t element_count_;
  std::vector<std::vector<IndexRange>> levels_;
};

SubarrayTree partition_subarrays(const SyntheticAperture& aperture, int levels);

/// Largest admissible level count for `element_count` elements.
int max_levels(std::size_t element_count);

}  // namespace hhsar
