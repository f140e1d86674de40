#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hhsar/errors.hpp"
#include "hhsar/model.hpp"
#include "hhsar/simulator.hpp"

namespace hhsar {

/// Delay-domain profiles s(p', t) of every element.
///
/// Profiles are stored as complex envelopes demodulated by the reference
/// carrier k_ref = (k_min + k_max)/2, so that linear interpolation acts on a
/// slowly varying signal; `sample` re-applies exp(j k_ref c tau). The time
/// axis starts at 0 and covers one alias-free period 1/delta_f.
class RangeProfileSet {
 public:
  RangeProfileSet(std::vector<Vec3> positions, std::size_t length, double dt, int upsample, double k_ref,
                  std::vector<cdouble> envelopes);

  std::size_t element_count() const { return positions_.size(); }
  std::size_t length() const { return length_; }
  double dt() const { return dt_; }
  double t0() const { return 0.0; }
  int upsample() const { return upsample_; }
  double k_ref() const { return k_ref_; }
  /// Largest delay that can be interpolated.
  double window_end() const { return dt_ * static_cast<double>(length_ - 1); }

  const std::vector<Vec3>& positions() const { return positions_; }
  std::span<const cdouble> envelope(std::size_t element) const {
    return {envelopes_.data() + element * length_, length_};
  }

  /// Complex profile value at round-trip delay `tau`, carrier included.
  /// Throws OutOfWindowError outside [0, window_end()].
  cdouble sample(std::size_t element, double tau) const;

  /// Backprojection kernel for a one-way range `range`; no bounds reporting
  /// beyond a boolean. Returns false when the delay is out of window.
  bool sample_range(std::size_t element, double range, cdouble& out) const {
    const double q = 2.0 * range * inv_c_dt_;
    if (!(q >= 0.0) || q > max_index_) return false;
    auto i = static_cast<std::size_t>(q);
    if (i + 1 >= length_) i = length_ - 2;
    const double frac = q - static_cast<double>(i);
    const cdouble* env = envelopes_.data() + element * length_;
    const cdouble v = env[i] + frac * (env[i + 1] - env[i]);
    const double phase = 2.0 * k_ref_ * range;
    out = v * cdouble(std::cos(phase), std::sin(phase));
    return true;
  }

 private:
  std::vector<Vec3> positions_;
  std::size_t length_;
  double dt_;
  int upsample_;
  double k_ref_;
  double inv_c_dt_;
  double max_index_;
  std::vector<cdouble> envelopes_;
};

/// Per-element zero-padded inverse DFT of the frequency samples (plain
/// Riemann sum, no 1/N). Profile length is upsample * N_f rounded up to a
/// power of two.
RangeProfileSet range_compress(const DataCube& cube, int upsample = 8);

/// Free-function form of RangeProfileSet::sample.
cdouble sample_delay(const RangeProfileSet& profiles, std::size_t element, double tau);

}  // namespace hhsar
