#include "hhsar/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hhsar/errors.hpp"

namespace hhsar {

namespace {

double to_db(double power_ratio) { return 10.0 * std::log10(power_ratio); }

}  // namespace

PsfReport psf_metrics(std::span<const cdouble> profile, double spacing) {
  const std::size_t n = profile.size();
  if (n < 3) throw ConfigError("psf_metrics: profile needs at least 3 samples");
  if (!(spacing > 0.0)) throw ConfigError("psf_metrics: spacing must be positive");

  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = std::norm(profile[i]);
  const auto peak_it = std::max_element(p.begin(), p.end());
  const std::size_t peak = static_cast<std::size_t>(peak_it - p.begin());
  const double pmax = *peak_it;
  if (!(pmax > 0.0)) throw DomainError("psf_metrics: profile is identically zero");

  auto at = [&](long offset) {
    const long len = static_cast<long>(n);
    return p[static_cast<std::size_t>(((static_cast<long>(peak) + offset) % len + len) % len)];
  };
  const long reach = static_cast<long>(n / 2);

  // First local minimum walking outward.
  auto find_null = [&](int dir) -> long {
    for (long d = 1; d < reach; ++d) {
      if (at(dir * d) <= at(dir * (d + 1)) && at(dir * d) < at(dir * (d - 1))) return d;
    }
    return -1;
  };
  const long null_r = find_null(+1);
  const long null_l = find_null(-1);
  if (null_r < 0 || null_l < 0) throw DomainError("psf_metrics: no null found; mainlobe is unmeasurable");

  // -3 dB crossing, interpolated linearly in dB.
  const double half = pmax / 2.0;
  auto crossing = [&](int dir) {
    for (long d = 1; d <= reach; ++d) {
      const double a = at(dir * (d - 1)), b = at(dir * d);
      if (b <= half) {
        const double da = to_db(a / pmax), db = b > 0.0 ? to_db(b / pmax) : -300.0;
        const double target = to_db(0.5);
        return static_cast<double>(d - 1) + (target - da) / (db - da);
      }
    }
    throw DomainError("psf_metrics: no -3 dB crossing found");
  };
  const double width_samples = crossing(+1) + crossing(-1);

  double main_energy = 0.0;
  for (long d = -null_l; d <= null_r; ++d) main_energy += at(d);
  double side_energy = 0.0;
  double side_peak = 0.0;
  for (long d = null_r + 1; d < static_cast<long>(n) - null_l; ++d) {
    side_energy += at(d);
    side_peak = std::max(side_peak, at(d));
  }

  PsfReport r;
  r.mainlobe_width = width_samples * spacing;
  r.pslr = side_peak > 0.0 ? to_db(side_peak / pmax) : -300.0;
  r.islr = side_energy > 0.0 ? to_db(side_energy / main_energy) : -300.0;
  r.peak_index = peak;
  r.peak_position = static_cast<double>(peak) * spacing;
  return r;
}

double psnr(std::span<const cdouble> reference, std::span<const cdouble> test) {
  if (reference.size() != test.size()) throw ConfigError("psnr: size mismatch");
  if (reference.empty()) throw ConfigError("psnr: empty input");
  cdouble cross{};
  double test_energy = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    cross += std::conj(test[i]) * reference[i];
    test_energy += std::norm(test[i]);
    peak = std::max(peak, std::abs(reference[i]));
  }
  const cdouble scale = test_energy > 0.0 ? cross / test_energy : cdouble{};
  double err = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) err += std::norm(scale * test[i] - reference[i]);
  const double rms = std::sqrt(err / static_cast<double>(reference.size()));
  if (!(peak > 0.0)) return rms > 0.0 ? -kPsnrCap : kPsnrCap;
  if (rms <= peak * 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 20.0 * std::log10(peak / rms));
}

double psnr(const ImageVolume& reference, const ImageVolume& test) {
  if (!(reference.grid.dims == test.grid.dims) || !reference.grid.origin.isApprox(test.grid.origin, 1e-9) ||
      !reference.grid.step.isApprox(test.grid.step, 1e-9)) {
    throw ConfigError("psnr: volumes are sampled on different grids");
  }
  return psnr(std::span<const cdouble>(reference.values), std::span<const cdouble>(test.values));
}

Axis parse_axis(char name) {
  switch (name) {
    case 'x': return Axis::X;
    case 'y': return Axis::Y;
    case 'z': return Axis::Z;
    default: throw ConfigError(std::string("axis must be x, y or z, got '") + name + "'");
  }
}

Image2D max_intensity_projection(const ImageVolume& volume, Axis axis, double floor_db) {
  if (!(floor_db < 0.0)) throw ConfigError("projection floor must be negative dB");
  const auto& d = volume.grid.dims;
  const int a = static_cast<int>(axis);
  const int c_axis = a == 0 ? 1 : 0;
  const int r_axis = a == 2 ? 1 : 2;
  Image2D img;
  img.width = d[c_axis];
  img.height = d[r_axis];
  img.pixels.assign(img.width * img.height, 0.0);

  std::vector<double> mag(img.pixels.size(), 0.0);
  double peak = 0.0;
  for (std::size_t iz = 0; iz < d[2]; ++iz) {
    for (std::size_t iy = 0; iy < d[1]; ++iy) {
      for (std::size_t ix = 0; ix < d[0]; ++ix) {
        const std::size_t idx[3] = {ix, iy, iz};
        const double v = std::abs(volume.at(ix, iy, iz));
        double& m = mag[idx[r_axis] * img.width + idx[c_axis]];
        m = std::max(m, v);
        peak = std::max(peak, v);
      }
    }
  }
  if (peak <= 0.0) return img;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const double db = mag[i] > 0.0 ? 20.0 * std::log10(mag[i] / peak) : floor_db;
    img.pixels[i] = std::clamp(1.0 - db / floor_db, 0.0, 1.0);
  }
  return img;
}

std::vector<cdouble> extract_cut(const ImageVolume& volume, Axis axis, std::size_t i0, std::size_t i1) {
  const auto& d = volume.grid.dims;
  const int a = static_cast<int>(axis);
  const int o0 = a == 0 ? 1 : 0;
  const int o1 = a == 2 ? 1 : 2;
  if (i0 >= d[o0] || i1 >= d[o1]) throw ConfigError("cut indices outside the volume");
  std::vector<cdouble> cut(d[a]);
  std::size_t idx[3];
  idx[o0] = i0;
  idx[o1] = i1;
  for (std::size_t i = 0; i < d[a]; ++i) {
    idx[a] = i;
    cut[i] = volume.at(idx[0], idx[1], idx[2]);
  }
  return cut;
}

}  // namespace hhsar
