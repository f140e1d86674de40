#include "hhsar/rangecomp.hpp"

#include <bit>
#include <memory>
#include <string>

#include <fftw3.h>

#include "hhsar/parallel.hpp"

namespace hhsar {

RangeProfileSet::RangeProfileSet(std::vector<Vec3> positions, std::size_t length, double dt, int upsample,
                                 double k_ref, std::vector<cdouble> envelopes)
    : positions_(std::move(positions)),
      length_(length),
      dt_(dt),
      upsample_(upsample),
      k_ref_(k_ref),
      inv_c_dt_(1.0 / (kSpeedOfLight * dt)),
      max_index_(static_cast<double>(length - 1)),
      envelopes_(std::move(envelopes)) {
  if (length_ < 2) throw ConfigError("range profiles need at least two samples");
  if (envelopes_.size() != positions_.size() * length_) {
    throw ConfigError("range profile storage does not match element count x length");
  }
}

cdouble RangeProfileSet::sample(std::size_t element, double tau) const {
  if (element >= element_count()) throw ConfigError("element index out of range");
  cdouble out;
  if (!sample_range(element, 0.5 * kSpeedOfLight * tau, out)) {
    throw OutOfWindowError("delay " + std::to_string(tau) + " s outside profile window [0, " +
                           std::to_string(window_end()) + "] s");
  }
  return out;
}

cdouble sample_delay(const RangeProfileSet& profiles, std::size_t element, double tau) {
  return profiles.sample(element, tau);
}

namespace {

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

}  // namespace

RangeProfileSet range_compress(const DataCube& cube, int upsample) {
  if (upsample < 1) throw ConfigError("range compression upsample factor must be >= 1");
  const FrequencyGrid& fg = cube.frequencies;
  const std::size_t nf = fg.count();
  const std::size_t length = std::bit_ceil(nf * static_cast<std::size_t>(upsample));
  const double dt = 1.0 / (static_cast<double>(length) * fg.delta_f());
  const double k_ref = 0.5 * (fg.k_min() + fg.k_max());
  const std::size_t ne = cube.element_count();

  // exp(j (k_min - k_ref) c t_m): baseband-to-envelope shift, shared by all elements.
  std::vector<cdouble> demod(length);
  for (std::size_t m = 0; m < length; ++m) {
    const double t = static_cast<double>(m) * dt;
    demod[m] = std::polar(1.0, (fg.k_min() - k_ref) * kSpeedOfLight * t);
  }

  std::unique_ptr<fftw_complex, FftwFree> probe(fftw_alloc_complex(length));
  std::unique_ptr<fftw_plan_s, PlanDestroy> plan(
      fftw_plan_dft_1d(static_cast<int>(length), probe.get(), probe.get(), FFTW_BACKWARD, FFTW_ESTIMATE));

  std::vector<cdouble> env(ne * length);
  parallel_for(ne, [&](std::size_t begin, std::size_t end) {
    std::unique_ptr<fftw_complex, FftwFree> buf(fftw_alloc_complex(length));
    auto* data = reinterpret_cast<cdouble*>(buf.get());
    for (std::size_t e = begin; e < end; ++e) {
      std::fill(data, data + length, cdouble{});
      std::copy_n(cube.values.data() + e * nf, nf, data);
      fftw_execute_dft(plan.get(), buf.get(), buf.get());
      cdouble* out = env.data() + e * length;
      for (std::size_t m = 0; m < length; ++m) out[m] = data[m] * demod[m];
    }
  });

  return RangeProfileSet(cube.aperture.elements, length, dt, upsample, k_ref, std::move(env));
}

}  // namespace hhsar
