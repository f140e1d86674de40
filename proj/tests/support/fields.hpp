#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>

#include <Eigen/LU>

#include "hhsar/model.hpp"
#include "hhsar/spectrum.hpp"

namespace hhsar::testing {

// Central-difference Jacobian: J(i, j) = d f_i / d p_j.
inline Mat3 numeric_jacobian(const std::function<Vec3(const Vec3&)>& f, const Vec3& p, double h) {
  Mat3 j;
  for (int c = 0; c < 3; ++c) {
    Vec3 d = Vec3::Zero();
    d[c] = h;
    j.col(c) = (f(p + d) - f(p - d)) / (2.0 * h);
  }
  return j;
}

inline Vec3 numeric_gradient(const std::function<double(const Vec3&)>& f, const Vec3& p, double h) {
  Vec3 g;
  for (int c = 0; c < 3; ++c) {
    Vec3 d = Vec3::Zero();
    d[c] = h;
    g[c] = (f(p + d) - f(p - d)) / (2.0 * h);
  }
  return g;
}

// |curl f| / |f| at p (units 1/m).
inline double relative_curl(const std::function<Vec3(const Vec3&)>& f, const Vec3& p, double h = 1e-5) {
  const Mat3 j = numeric_jacobian(f, p, h);
  const Vec3 curl(j(2, 1) - j(1, 2), j(0, 2) - j(2, 0), j(1, 0) - j(0, 1));
  return curl.norm() / f(p).norm();
}

// Smallest eps for which every local wavenumber from the four subarray
// corners at k_min and k_max lies in the key-point parallelepiped grown by
// (1 + eps); negative when they sit strictly inside.
inline double corner_excess(const LocalSpectrum& model, const Vec3& p) {
  const KeyPointSet kp = model.keypoints(p);
  Mat3 basis;
  basis.col(0) = kp.v1;
  basis.col(1) = kp.v2;
  basis.col(2) = kp.v3;
  const Eigen::FullPivLU<Mat3> lu(basis);
  const auto& e = model.extents();
  double worst = 0.0;
  for (double xs : {e.x_min, e.x_max}) {
    for (double ys : {e.y_min, e.y_max}) {
      for (double k : {model.k_min(), model.k_max()}) {
        const Vec3 coeff = lu.solve(local_wavenumber(Vec3(xs, ys, 0.0), p, k) - kp.center);
        worst = std::max(worst, coeff.cwiseAbs().maxCoeff());
      }
    }
  }
  return 2.0 * worst - 1.0;
}

inline bool corners_contained(const LocalSpectrum& model, const Vec3& p, double eps) {
  return corner_excess(model, p) <= eps;
}

inline Vec3 uniform_point(const ImagingRegion& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {r.x_min + u(rng) * r.extent_x(), r.y_min + u(rng) * r.extent_y(), r.z_min + u(rng) * r.extent_z()};
}

}  // namespace hhsar::testing
