#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "hhsar/model.hpp"

namespace hhsar {

/// 2k times the unit vector from p' to p: the stationary-phase wavenumber a
/// single element contributes to the image spectrum at p. |result| = 2k.
/// Throws DomainError if p == p'.
Vec3 local_wavenumber(const Vec3& p_prime, const Vec3& p, double k);

/// Wavenumber key points bounding the local spectrum of one subarray at one
/// image point.
///
/// k1/k2 and k3/k4 are the azimuth extremes at k_max (x and y), k5 is the
/// vertex average at k_min, k6 rescales k5 to 2 k_max and k7 is the
/// curl-free replacement for k6. The parallelepiped spanned by v1, v2, v3
/// around `center` approximates the minimum-volume bounding box of the
/// local spectrum.
struct KeyPointSet {
  std::array<Vec3, 7> k;  // k[0] is k1, ..., k[6] is k7
  Vec3 v1, v2, v3;
  Vec3 center;  // (k5 + k7) / 2

  const Vec3& operator()(int one_based) const { return k[static_cast<std::size_t>(one_based - 1)]; }
};

/// Analytic local-spectrum model of a subarray.
///
/// Element depths are taken as zero throughout (the subarray is treated as
/// planar at z' = 0); reconstruction delays still use the true positions.
/// All queries require p.z() > 0 and throw DomainError otherwise.
///
/// Transformed coordinates follow the closed-form potentials
///   u = (k_max/pi)   (|p - a_min| - |p - a_max|)
///   v = (k_max/pi)   (|p - b_min| - |p - b_max|)
///   n = (k_max/4pi)  S - (k_min/4pi) r,   S = sqrt(r^2 - 4 W^2 - 4 H^2)
/// with r the summed distance to the four subarray vertices. With that
/// orientation grad u = -v1/2pi, grad v = -v2/2pi and grad n = +v3/2pi.
class LocalSpectrum {
 public:
  LocalSpectrum(const SubarrayExtents& extents, double k_min, double k_max);

  const SubarrayExtents& extents() const { return ext_; }
  double k_min() const { return k_min_; }
  double k_max() const { return k_max_; }

  KeyPointSet keypoints(const Vec3& p) const;
  /// Spatial downconversion phase; its gradient is the spectrum centre k_c.
  double phase(const Vec3& p) const;
  /// (u, v, n) of p.
  Vec3 forward(const Vec3& p) const;
  /// forward() and phase() sharing one set of distance evaluations.
  Vec3 forward(const Vec3& p, double& phase) const;
  /// T_s = (1/2pi) [v1^T; v2^T; v3^T].
  Mat3 transform(const Vec3& p) const;
  /// d(u,v,n)/d(x,y,z): T_s with the u and v rows negated.
  Mat3 forward_jacobian(const Vec3& p) const;

  /// Row signs relating forward_jacobian() to transform().
  static Vec3 orientation() { return {-1.0, -1.0, 1.0}; }

 private:
  struct Distances {
    double r;   // summed vertex distance
    double s;   // sqrt(r^2 - 4W^2 - 4H^2)
    double da0, da1, db0, db1;  // distances to the u and v anchor points
  };
  Distances distances(const Vec3& p) const;
  void check_domain(const Vec3& p) const;

  SubarrayExtents ext_;
  double k_min_;
  double k_max_;
  double aperture_term_;  // 4 W^2 + 4 H^2
};

KeyPointSet keypoints(const SubarrayExtents& ext, const Vec3& p, const FrequencyGrid& kgrid);
double sdc_phase(const SubarrayExtents& ext, const Vec3& p, const FrequencyGrid& kgrid);
Vec3 llt_forward(const SubarrayExtents& ext, const Vec3& p, const FrequencyGrid& kgrid);
Mat3 llt_jacobian(const SubarrayExtents& ext, const Vec3& p, const FrequencyGrid& kgrid);

/// Nyquist sample spacings of the image of an aperture (or subarray) over a
/// region, from the planar closed form. The y spacing uses the same
/// (y_max - y'_min) numerator as the x spacing.
struct NyquistRates {
  double dx = 0.0, dy = 0.0, dz = 0.0;
  /// V(D) / (dx dy dz).
  double sample_count = 0.0;
};

NyquistRates nyquist_rates(const SubarrayExtents& ext, const ImagingRegion& region, const FrequencyGrid& kgrid);

/// Grid dimensions for a region sampled at `rates`: each spacing is rounded
/// down to the 1-2-5 series and the sample count per axis rounded up.
std::array<std::size_t, 3> nyquist_dims(const NyquistRates& rates, const ImagingRegion& region);

struct InversionOptions {
  double tolerance = 1e-9;  // on |forward(p) - target|_inf
  int max_iterations = 50;
  /// When set, results outside this region are rejected.
  std::optional<ImagingRegion> bounds;
};

struct InversionResult {
  Vec3 position;
  int iterations = 0;
};

/// Damped Newton solve of forward(p) = target from `guess`. Returns nullopt
/// on non-convergence, on leaving the half-space z > 0, or when the result
/// falls outside `options.bounds`.
std::optional<InversionResult> try_llt_invert(const LocalSpectrum& model, const Vec3& target, const Vec3& guess,
                                              const InversionOptions& options = {});

/// Throwing form: DomainError on any failure.
InversionResult llt_invert(const SubarrayExtents& ext, const Vec3& target, const Vec3& guess,
                           const FrequencyGrid& kgrid, const InversionOptions& options = {});

}  // namespace hhsar
