#include "hhsar/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "hhsar/errors.hpp"

namespace hhsar {

Vec3 local_wavenumber(const Vec3& p_prime, const Vec3& p, double k) {
  const Vec3 d = p - p_prime;
  const double r = d.norm();
  if (!(r > 0.0)) throw DomainError("local wavenumber undefined for coincident points");
  return (2.0 * k / r) * d;
}

LocalSpectrum::LocalSpectrum(const SubarrayExtents& extents, double k_min, double k_max)
    : ext_(extents),
      k_min_(k_min),
      k_max_(k_max),
      aperture_term_(4.0 * extents.width() * extents.width() + 4.0 * extents.height() * extents.height()) {
  if (!(extents.x_max >= extents.x_min) || !(extents.y_max >= extents.y_min)) {
    throw ConfigError("subarray extents must satisfy min <= max");
  }
  if (!(k_min > 0.0) || !(k_max > k_min)) throw ConfigError("local spectrum needs 0 < k_min < k_max");
}

void LocalSpectrum::check_domain(const Vec3& p) const {
  if (!(p.z() > 0.0)) {
    throw DomainError("local spectrum requires points in front of the subarray (z > 0), got z = " +
                      std::to_string(p.z()));
  }
}

namespace {

inline double dist(double dx, double dy, double z2) { return std::sqrt(dx * dx + dy * dy + z2); }

}  // namespace

LocalSpectrum::Distances LocalSpectrum::distances(const Vec3& p) const {
  check_domain(p);
  const double x = p.x(), y = p.y(), z2 = p.z() * p.z();
  const double x0 = std::clamp(x, ext_.x_min, ext_.x_max);
  const double y0 = std::clamp(y, ext_.y_min, ext_.y_max);
  Distances d{};
  d.r = dist(x - ext_.x_min, y - ext_.y_min, z2) + dist(x - ext_.x_min, y - ext_.y_max, z2) +
        dist(x - ext_.x_max, y - ext_.y_min, z2) + dist(x - ext_.x_max, y - ext_.y_max, z2);
  const double s2 = d.r * d.r - aperture_term_;
  if (!(s2 > 0.0)) throw DomainError("point too close to the subarray plane for the curl-free range key point");
  d.s = std::sqrt(s2);
  d.da0 = dist(x - ext_.x_min, y - y0, z2);
  d.da1 = dist(x - ext_.x_max, y - y0, z2);
  d.db0 = dist(x - x0, y - ext_.y_min, z2);
  d.db1 = dist(x - x0, y - ext_.y_max, z2);
  return d;
}

KeyPointSet LocalSpectrum::keypoints(const Vec3& p) const {
  const Distances d = distances(p);
  const double x0 = std::clamp(p.x(), ext_.x_min, ext_.x_max);
  const double y0 = std::clamp(p.y(), ext_.y_min, ext_.y_max);
  KeyPointSet kp;
  kp.k[0] = local_wavenumber(Vec3(ext_.x_min, y0, 0.0), p, k_max_);
  kp.k[1] = local_wavenumber(Vec3(ext_.x_max, y0, 0.0), p, k_max_);
  kp.k[2] = local_wavenumber(Vec3(x0, ext_.y_min, 0.0), p, k_max_);
  kp.k[3] = local_wavenumber(Vec3(x0, ext_.y_max, 0.0), p, k_max_);
  kp.k[4] = 0.25 * (local_wavenumber(Vec3(ext_.x_min, ext_.y_min, 0.0), p, k_min_) +
                    local_wavenumber(Vec3(ext_.x_min, ext_.y_max, 0.0), p, k_min_) +
                    local_wavenumber(Vec3(ext_.x_max, ext_.y_min, 0.0), p, k_min_) +
                    local_wavenumber(Vec3(ext_.x_max, ext_.y_max, 0.0), p, k_min_));
  kp.k[5] = (2.0 * k_max_ / kp.k[4].norm()) * kp.k[4];
  const double beta = k_max_ * d.r / (k_min_ * d.s);
  kp.k[6] = beta * kp.k[4];
  kp.v1 = kp.k[1] - kp.k[0];
  kp.v2 = kp.k[3] - kp.k[2];
  kp.v3 = kp.k[6] - kp.k[4];
  kp.center = 0.5 * (kp.k[4] + kp.k[6]);
  return kp;
}

double LocalSpectrum::phase(const Vec3& p) const {
  const Distances d = distances(p);
  return 0.25 * (k_max_ * d.s + k_min_ * d.r);
}

Vec3 LocalSpectrum::forward(const Vec3& p) const {
  double unused = 0.0;
  return forward(p, unused);
}

Vec3 LocalSpectrum::forward(const Vec3& p, double& phase) const {
  const Distances d = distances(p);
  phase = 0.25 * (k_max_ * d.s + k_min_ * d.r);
  const double a = k_max_ / kPi;
  return {a * (d.da0 - d.da1), a * (d.db0 - d.db1), (k_max_ * d.s - k_min_ * d.r) / (4.0 * kPi)};
}

Mat3 LocalSpectrum::transform(const Vec3& p) const {
  const KeyPointSet kp = keypoints(p);
  Mat3 t;
  t.row(0) = kp.v1.transpose();
  t.row(1) = kp.v2.transpose();
  t.row(2) = kp.v3.transpose();
  return t / (2.0 * kPi);
}

Mat3 LocalSpectrum::forward_jacobian(const Vec3& p) const {
  return orientation().asDiagonal() * transform(p);
}

KeyPointSet keypoints(const SubarrayExtents& ext, const Vec3& p, const FrequencyGrid& kgrid) {
  return LocalSpectrum(ext, kgrid.k_min(), kgrid.k_max()).keypoints(p);
}

double sdc_phase(const SubarrayExtents& ext, const Vec3& p, const FrequencyGrid& kgrid) {
  return LocalSpectrum(ext, kgrid.k_min(), kgrid.k_max()).phase(p);
}

Vec3 llt_forward(const SubarrayExtents& ext, const Vec3& p, const FrequencyGrid& kgrid) {
  return LocalSpectrum(ext, kgrid.k_min(), kgrid.k_max()).forward(p);
}

Mat3 llt_jacobian(const SubarrayExtents& ext, const Vec3& p, const FrequencyGrid& kgrid) {
  const Mat3 t = LocalSpectrum(ext, kgrid.k_min(), kgrid.k_max()).transform(p);
  const double det = t.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-300) {
    throw DomainError("local linear transform is singular at this point");
  }
  return t;
}

NyquistRates nyquist_rates(const SubarrayExtents& ext, const ImagingRegion& region, const FrequencyGrid& kgrid) {
  region.validate();
  const double zmin = region.z_min;
  const double kmax = kgrid.k_max();
  const double kmin = kgrid.k_min();
  auto sine = [zmin](double d) { return d / std::sqrt(d * d + zmin * zmin); };

  const double span_x = sine(region.x_max - ext.x_min) - sine(region.x_min - ext.x_max);
  const double span_y = sine(region.y_max - ext.y_min) - sine(region.y_min - ext.y_max);
  const double xd = std::max(std::abs(region.x_min - ext.x_max), std::abs(region.x_max - ext.x_min));
  const double yd = std::max(std::abs(region.y_min - ext.y_max), std::abs(region.y_max - ext.y_min));
  const double span_z = kmax - kmin * zmin / std::sqrt(xd * xd + yd * yd + zmin * zmin);
  if (!(span_x > 0.0) || !(span_y > 0.0) || !(span_z > 0.0)) {
    throw DomainError("degenerate geometry: empty spectral support");
  }
  NyquistRates r;
  r.dx = kPi / (kmax * span_x);
  r.dy = kPi / (kmax * span_y);
  r.dz = kPi / span_z;
  r.sample_count = region.volume() / (r.dx * r.dy * r.dz);
  return r;
}

namespace {

// Largest value of the form {1, 2, 5} x 10^e not exceeding v.
double round_down_125(double v) {
  const double decade = std::pow(10.0, std::floor(std::log10(v)));
  const double mant = v / decade;
  const double nice = mant >= 5.0 ? 5.0 : (mant >= 2.0 ? 2.0 : 1.0);
  return nice * decade;
}

}  // namespace

std::array<std::size_t, 3> nyquist_dims(const NyquistRates& rates, const ImagingRegion& region) {
  const std::array<double, 3> step{rates.dx, rates.dy, rates.dz};
  const std::array<double, 3> extent{region.extent_x(), region.extent_y(), region.extent_z()};
  std::array<std::size_t, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    const double cells = extent[a] / round_down_125(step[a]);
    dims[a] = static_cast<std::size_t>(std::ceil(cells - 1e-9)) + 1;
  }
  return dims;
}

std::optional<InversionResult> try_llt_invert(const LocalSpectrum& model, const Vec3& target, const Vec3& guess,
                                              const InversionOptions& options) {
  if (!(guess.z() > 0.0) || !guess.allFinite()) return std::nullopt;
  Vec3 p = guess;
  Vec3 residual = model.forward(p) - target;
  double merit = residual.lpNorm<Eigen::Infinity>();
  int it = 0;
  while (merit > options.tolerance) {
    if (it >= options.max_iterations) return std::nullopt;
    ++it;
    const Mat3 j = model.forward_jacobian(p);
    Eigen::FullPivLU<Mat3> lu(j);
    if (!lu.isInvertible()) return std::nullopt;
    const Vec3 step = lu.solve(residual);
    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
      const Vec3 trial = p - lambda * step;
      if (!(trial.z() > 0.0) || !trial.allFinite()) continue;
      const Vec3 r = model.forward(trial) - target;
      const double m = r.lpNorm<Eigen::Infinity>();
      if (m < merit) {
        p = trial;
        residual = r;
        merit = m;
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
  }
  if (options.bounds && !options.bounds->contains(p)) return std::nullopt;
  return InversionResult{p, it};
}

InversionResult llt_invert(const SubarrayExtents& ext, const Vec3& target, const Vec3& guess,
                           const FrequencyGrid& kgrid, const InversionOptions& options) {
  const LocalSpectrum model(ext, kgrid.k_min(), kgrid.k_max());
  auto res = try_llt_invert(model, target, guess, options);
  if (!res) {
    throw DomainError("local linear transform inversion failed to converge within " +
                      std::to_string(options.max_iterations) + " iterations or left the admissible region");
  }
  return *res;
}

}  // namespace hhsar
