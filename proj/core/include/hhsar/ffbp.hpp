#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hhsar/bpa.hpp"
#include "hhsar/model.hpp"
#include "hhsar/rangecomp.hpp"
#include "hhsar/simulator.hpp"
#include "hhsar/spectrum.hpp"

namespace hhsar {

enum class InterpKernel { Linear, Cubic };

InterpKernel parse_kernel(const std::string& name);
std::string to_string(InterpKernel kernel);

struct FfbpParams {
  int levels = 1;
  /// Lattice step in (u, v, n) is 1/oversample.
  double oversample = 1.4;
  InterpKernel kernel = InterpKernel::Linear;
  /// Lattice points whose spatial position leaves the region grown by this
  /// fraction of its extents are masked.
  double region_margin = 0.25;
  int upsample = 8;

  void validate() const;
};

/// floor(log2(side)) - 2, at least 1.
int default_levels(std::size_t aperture_side);

struct LatticeAxis {
  double origin = 0.0;
  double step = 1.0;
  std::size_t count = 1;

  double coordinate(std::size_t i) const { return origin + step * static_cast<double>(i); }
};

/// Uniform (u, v, n) lattice of one subarray with the spatial position of
/// every lattice point. u varies fastest.
struct SubimageGrid {
  IndexRange elements;
  SubarrayExtents extents;
  std::array<LatticeAxis, 3> axes;
  std::vector<Vec3> positions;
  std::vector<std::uint8_t> valid;
  std::size_t valid_count = 0;
  /// Nodes an inversion was attempted for (all nodes for region grids).
  std::size_t requested = 0;
  /// Newton iterations per successfully inverted point (for diagnostics).
  std::vector<std::uint8_t> iterations;

  std::size_t size() const { return positions.size(); }
  std::size_t index(std::size_t iu, std::size_t iv, std::size_t in) const {
    return (in * axes[1].count + iv) * axes[0].count + iu;
  }
  Vec3 lattice_point(std::size_t i) const;
  std::size_t count_inside(const ImagingRegion& region) const;
  double masked_fraction() const {
    return size() == 0 ? 0.0 : 1.0 - static_cast<double>(valid_count) / static_cast<double>(size());
  }
};

/// (u, v, n) lattice covering `region` for a subarray: llt_forward is
/// evaluated on a 5x5x5 lattice spanning the region and the min/max padded by
/// two steps of 1/oversample per side.
std::array<LatticeAxis, 3> subimage_lattice(const SubarrayExtents& extents, const ImagingRegion& region,
                                            const FrequencyGrid& kgrid, double oversample);

/// Lattice bounds come from llt_forward over a 5x5x5 lattice spanning
/// `region`, padded by two lattice steps per side. Positions are found by
/// warm-started Newton inversion; failures and positions outside the
/// margin-expanded region are masked. Throws DomainError if no point survives.
SubimageGrid build_subimage_grid(const SyntheticAperture& aperture, IndexRange subarray, const ImagingRegion& region,
                                 const FrequencyGrid& kgrid, double oversample, double region_margin = 0.25);

/// Lattice sized to what a parent needs: its bounds cover llt_forward of the
/// valid `demand` points plus two steps, and only nodes inside some demand
/// point's `kernel` stencil are inverted (seeded from that point); all other
/// nodes are masked. An empty `demand_valid` marks every demand point valid.
/// Throws DomainError when half or more of the requested inversions fail.
SubimageGrid build_demand_grid(const SyntheticAperture& aperture, IndexRange subarray, const FrequencyGrid& kgrid,
                               double oversample, InterpKernel kernel, std::span<const Vec3> demand,
                               std::span<const std::uint8_t> demand_valid = {});

struct Subimage {
  std::shared_ptr<const SubimageGrid> grid;
  std::vector<cdouble> values;
  /// true when values hold f' = f exp(-j Phi) rather than raw f.
  bool downconverted = false;
};

/// Backprojection over the subarray at the grid's valid positions; masked
/// points carry zero.
Subimage level1_reconstruct(const RangeProfileSet& profiles, std::shared_ptr<const SubimageGrid> grid);

struct MergeOptions {
  InterpKernel kernel = InterpKernel::Linear;
  /// When false, Phi is taken as zero (no downconversion).
  bool spatial_downconversion = true;
};

struct MergeStats {
  std::size_t evaluated = 0;
  /// Points whose interpolation stencil left a child's lattice; these are
  /// zeroed. Masked lattice samples inside a stencil contribute zero.
  std::size_t flagged = 0;
};

/// Evaluates f_a + f_b at arbitrary positions by SDC-guarded interpolation
/// of each child on its own lattice. Entries with valid[i] == 0 are skipped
/// (left zero); an empty `valid` means all points are evaluated.
std::vector<cdouble> merge_onto(const Subimage& a, const Subimage& b, std::span<const Vec3> positions,
                                std::span<const std::uint8_t> valid, const FrequencyGrid& kgrid,
                                const MergeOptions& options = {}, MergeStats* stats = nullptr);

/// Children a, b merged onto the parent's lattice. Result is raw (not
/// downconverted).
Subimage merge_pair(const Subimage& a, const Subimage& b, std::shared_ptr<const SubimageGrid> parent,
                    const FrequencyGrid& kgrid, const MergeOptions& options = {}, MergeStats* stats = nullptr);

struct LevelReport {
  int level = 0;
  std::vector<std::size_t> lattice_points;
  std::vector<std::size_t> valid_points;
  /// Valid lattice points whose position lies inside the imaging region.
  std::vector<std::size_t> region_points;
  MergeStats merge;
  double grid_seconds = 0.0;
  double compute_seconds = 0.0;
};

struct FfbpReport {
  std::vector<LevelReport> levels;
  double range_compress_seconds = 0.0;
  double total_seconds = 0.0;

  std::size_t flagged() const;
  std::size_t evaluated() const;
};

/// Rejects geometries where the region comes closer to the aperture plane
/// than half the diagonal of any level-1 subarray.
void check_factorization_domain(const SyntheticAperture& aperture, const SubarrayTree& tree,
                                const ImagingRegion& region);

/// Range compression, M-level factorized backprojection and a final merge
/// onto the Cartesian grid spanning `region`. With one level the final grid
/// is reconstructed directly by backprojection.
ImageVolume hhffbpa_reconstruct(const DataCube& cube, const ImagingRegion& region, std::array<std::size_t, 3> dims,
                                const FfbpParams& params, FfbpReport* report = nullptr);

/// Operation-count model of the factorized reconstruction.
struct OpCountReport {
  double c1 = 1.0, c2 = 1.0, c3 = 1.0;
  std::size_t elements = 0;
  std::size_t frequencies = 0;
  int levels = 1;
  /// Sample counts per level (level 1 first); the last level is the final grid.
  std::vector<std::vector<std::size_t>> level_samples;
  double range_compression = 0.0;
  double backprojection = 0.0;
  double interpolation = 0.0;
  double total = 0.0;
  /// Asymptotic form assuming the per-level sample count doubles.
  double approx_backprojection = 0.0;
  double approx_interpolation = 0.0;
  double approx_total = 0.0;
  /// Measured wall times, filled in by callers that ran the reconstruction.
  double measured_seconds = 0.0;
};

struct OpCountConstants {
  double c1 = 1.0, c2 = 1.0, c3 = 1.0;
};

/// Closed-form counts with N_s taken from built subimage grids (levels
/// 1..M-1) and from the final Cartesian grid (level M).
OpCountReport predict_op_count(const SyntheticAperture& aperture, const ImagingRegion& region,
                               const FrequencyGrid& kgrid, const FfbpParams& params,
                               std::array<std::size_t, 3> final_dims, const OpCountConstants& constants = {});

/// Same model with caller-supplied per-level sample counts.
OpCountReport op_count_from_samples(std::size_t elements, std::size_t frequencies, const SubarrayTree& tree,
                                    std::vector<std::vector<std::size_t>> level_samples,
                                    const OpCountConstants& constants = {});

/// Centre-subarray sample count at level m of M for a square aperture of
/// side L, centre range z_mid (closed-form, determinant at region centre).
double centre_subimage_samples(int m, int levels, double region_volume, double aperture_size, double z_mid,
                               const FrequencyGrid& kgrid);

}  // namespace hhsar
