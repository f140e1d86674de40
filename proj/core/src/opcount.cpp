#include <cmath>
#include <numeric>

#include "hhsar/errors.hpp"
#include "hhsar/ffbp.hpp"

namespace hhsar {

OpCountReport op_count_from_samples(std::size_t elements, std::size_t frequencies, const SubarrayTree& tree,
                                    std::vector<std::vector<std::size_t>> level_samples,
                                    const OpCountConstants& constants) {
  const int levels = tree.levels();
  if (static_cast<int>(level_samples.size()) != levels) {
    throw ConfigError("op count: need sample counts for every level");
  }
  for (int m = 1; m < levels; ++m) {
    if (level_samples[static_cast<std::size_t>(m - 1)].size() != tree.level(m).size()) {
      throw ConfigError("op count: level " + std::to_string(m) + " sample counts do not match the tree");
    }
  }
  if (level_samples.back().size() != 1) throw ConfigError("op count: final level must hold one sample count");

  OpCountReport r;
  r.c1 = constants.c1;
  r.c2 = constants.c2;
  r.c3 = constants.c3;
  r.elements = elements;
  r.frequencies = frequencies;
  r.levels = levels;

  const auto na = static_cast<double>(elements);
  const auto nf = static_cast<double>(frequencies);
  r.range_compression = r.c1 * na * nf * std::log2(nf);

  const auto& first = tree.level(1);
  for (std::size_t n = 0; n < first.size(); ++n) {
    r.backprojection += r.c2 * static_cast<double>(first[n].size()) * static_cast<double>(level_samples[0][n]);
  }
  for (int m = 2; m <= levels; ++m) {
    const auto& counts = level_samples[static_cast<std::size_t>(m - 1)];
    const double sum = std::accumulate(counts.begin(), counts.end(), 0.0);
    r.interpolation += 2.0 * r.c3 * sum;
  }
  r.total = r.range_compression + r.backprojection + r.interpolation;

  const auto ns_final = static_cast<double>(level_samples.back()[0]);
  r.approx_backprojection = r.c2 * na * ns_final / std::ldexp(1.0, levels - 1);
  r.approx_interpolation = 2.0 * r.c3 * (levels - 1) * ns_final;
  r.approx_total = r.range_compression + r.approx_backprojection + r.approx_interpolation;
  r.level_samples = std::move(level_samples);
  return r;
}

OpCountReport predict_op_count(const SyntheticAperture& aperture, const ImagingRegion& region,
                               const FrequencyGrid& kgrid, const FfbpParams& params,
                               std::array<std::size_t, 3> final_dims, const OpCountConstants& constants) {
  params.validate();
  const SubarrayTree tree = partition_subarrays(aperture, params.levels);
  std::vector<std::vector<std::size_t>> samples;
  for (int m = 1; m < params.levels; ++m) {
    std::vector<std::size_t> counts;
    for (const IndexRange& r : tree.level(m)) {
      const auto axes = subimage_lattice(aperture.extents(r), region, kgrid, params.oversample);
      counts.push_back(axes[0].count * axes[1].count * axes[2].count);
    }
    samples.push_back(std::move(counts));
  }
  samples.push_back({final_dims[0] * final_dims[1] * final_dims[2]});
  return op_count_from_samples(aperture.size(), kgrid.count(), tree, std::move(samples), constants);
}

double centre_subimage_samples(int m, int levels, double region_volume, double aperture_size, double z_mid,
                               const FrequencyGrid& kgrid) {
  if (m < 1 || m > levels) throw ConfigError("level out of range");
  const double kmin = kgrid.k_min(), kmax = kgrid.k_max();
  const double l2 = aperture_size * aperture_size;
  const double z2 = 4.0 * z_mid * z_mid;
  const double num = region_volume * l2 * kmax * kmax *
                     (kmax - 2.0 * kmin * z_mid / std::sqrt(std::ldexp(l2, m - levels + 1) + z2));
  const double den = std::ldexp(1.0, levels - m - 2) * kPi * kPi * kPi * (std::ldexp(l2, m - levels) + z2);
  return num / den;
}

}  // namespace hhsar
