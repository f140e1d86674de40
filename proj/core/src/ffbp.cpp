#include "hhsar/ffbp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "hhsar/errors.hpp"
#include "hhsar/parallel.hpp"

namespace hhsar {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Queries this close outside a lattice (in steps) are snapped onto it.
constexpr double kHullSlack = 1e-6;


}  // namespace

InterpKernel parse_kernel(const std::string& name) {
  if (name == "linear") return InterpKernel::Linear;
  if (name == "cubic") return InterpKernel::Cubic;
  throw ConfigError("unknown interpolation kernel '" + name + "' (expected linear|cubic)");
}

std::string to_string(InterpKernel kernel) { return kernel == InterpKernel::Linear ? "linear" : "cubic"; }

void FfbpParams::validate() const {
  if (levels < 1) throw ConfigError("levels must be >= 1");
  if (!(oversample >= 1.0)) throw ConfigError("oversample must be >= 1");
  if (!(region_margin >= 0.0)) throw ConfigError("region margin must be non-negative");
  if (upsample < 1) throw ConfigError("upsample must be >= 1");
}

int default_levels(std::size_t aperture_side) {
  if (aperture_side < 2) return 1;
  const int lg = static_cast<int>(std::floor(std::log2(static_cast<double>(aperture_side))));
  return std::max(1, lg - 2);
}

Vec3 SubimageGrid::lattice_point(std::size_t i) const {
  const std::size_t nu = axes[0].count;
  const std::size_t nv = axes[1].count;
  const std::size_t iu = i % nu;
  const std::size_t iv = (i / nu) % nv;
  const std::size_t in = i / (nu * nv);
  return {axes[0].coordinate(iu), axes[1].coordinate(iv), axes[2].coordinate(in)};
}

std::size_t SubimageGrid::count_inside(const ImagingRegion& region) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i) n += valid[i] && region.contains(positions[i], 1e-12);
  return n;
}

std::array<LatticeAxis, 3> subimage_lattice(const SubarrayExtents& extents, const ImagingRegion& region,
                                            const FrequencyGrid& kgrid, double oversample) {
  if (!(oversample >= 1.0)) throw ConfigError("oversample must be >= 1");
  const LocalSpectrum model(extents, kgrid.k_min(), kgrid.k_max());
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int iz = 0; iz < 5; ++iz) {
    for (int iy = 0; iy < 5; ++iy) {
      for (int ix = 0; ix < 5; ++ix) {
        const Vec3 p(region.x_min + 0.25 * ix * region.extent_x(), region.y_min + 0.25 * iy * region.extent_y(),
                     region.z_min + 0.25 * iz * region.extent_z());
        const Vec3 c = model.forward(p);
        lo = lo.cwiseMin(c);
        hi = hi.cwiseMax(c);
      }
    }
  }
  const double step = 1.0 / oversample;
  std::array<LatticeAxis, 3> axes;
  for (int a = 0; a < 3; ++a) {
    axes[a].step = step;
    axes[a].origin = lo[a] - 2.0 * step;
    axes[a].count = static_cast<std::size_t>(std::ceil((hi[a] - lo[a]) / step)) + 5;
  }
  return axes;
}

SubimageGrid build_subimage_grid(const SyntheticAperture& aperture, IndexRange subarray, const ImagingRegion& region,
                                 const FrequencyGrid& kgrid, double oversample, double region_margin) {
  region.validate();
  SubimageGrid grid;
  grid.elements = subarray;
  grid.extents = aperture.extents(subarray);
  const LocalSpectrum model(grid.extents, kgrid.k_min(), kgrid.k_max());

  grid.axes = subimage_lattice(grid.extents, region, kgrid, oversample);

  const std::size_t nu = grid.axes[0].count, nv = grid.axes[1].count, nn = grid.axes[2].count;
  const std::size_t total = nu * nv * nn;
  grid.positions.assign(total, Vec3::Zero());
  grid.valid.assign(total, 0);
  grid.iterations.assign(total, 0);
  grid.requested = total;

  const ImagingRegion keep = region.expanded(region_margin);
  // Converged inversions (inside the kept region or not) seed their neighbours.
  std::vector<std::uint8_t> solved(total, 0);

  // Linearisation about the region centre seeds points with no solved neighbour.
  const Vec3 centre = region.center();
  const Vec3 centre_uvn = model.forward(centre);
  const Eigen::FullPivLU<Mat3> centre_lu(model.forward_jacobian(centre));
  auto linear_guess = [&](const Vec3& target) {
    Vec3 g = centre + centre_lu.solve(target - centre_uvn);
    if (!g.allFinite()) g = centre;
    g.z() = std::max(g.z(), 0.5 * region.z_min);
    return g;
  };

  for (std::size_t in = 0; in < nn; ++in) {
    for (std::size_t iv = 0; iv < nv; ++iv) {
      for (std::size_t iu = 0; iu < nu; ++iu) {
        const std::size_t i = grid.index(iu, iv, in);
        const Vec3 target(grid.axes[0].coordinate(iu), grid.axes[1].coordinate(iv), grid.axes[2].coordinate(in));
        std::optional<Vec3> warm;
        if (iu > 0 && solved[i - 1]) {
          warm = grid.positions[i - 1];
        } else if (iv > 0 && solved[grid.index(iu, iv - 1, in)]) {
          warm = grid.positions[grid.index(iu, iv - 1, in)];
        } else if (in > 0 && solved[grid.index(iu, iv, in - 1)]) {
          warm = grid.positions[grid.index(iu, iv, in - 1)];
        }
        std::optional<InversionResult> res;
        if (warm) res = try_llt_invert(model, target, *warm);
        if (!res) res = try_llt_invert(model, target, linear_guess(target));
        if (!res) continue;
        solved[i] = 1;
        grid.positions[i] = res->position;
        grid.iterations[i] = static_cast<std::uint8_t>(std::min(res->iterations, 255));
        if (keep.contains(res->position)) {
          grid.valid[i] = 1;
          ++grid.valid_count;
        }
      }
    }
  }
  if (grid.valid_count == 0) {
    throw DomainError("subimage grid for elements [" + std::to_string(subarray.begin) + ", " +
                      std::to_string(subarray.end) + ") has no lattice point inside the region");
  }
  return grid;
}

Subimage level1_reconstruct(const RangeProfileSet& profiles, std::shared_ptr<const SubimageGrid> grid) {
  std::vector<Vec3> pts;
  std::vector<std::size_t> where;
  pts.reserve(grid->valid_count);
  where.reserve(grid->valid_count);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (grid->valid[i]) {
      pts.push_back(grid->positions[i]);
      where.push_back(i);
    }
  }
  const std::vector<cdouble> vals = backproject(profiles, grid->elements, pts);
  Subimage sub;
  sub.values.assign(grid->size(), cdouble{});
  for (std::size_t j = 0; j < where.size(); ++j) sub.values[where[j]] = vals[j];
  sub.grid = std::move(grid);
  return sub;
}

namespace {

// Keys cubic convolution kernel, a = -1/2.
inline double keys(double t) {
  t = std::abs(t);
  if (t <= 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
  if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
  return 0.0;
}

// One child prepared for interpolation: downconverted samples on its lattice.
struct ChildField {
  const SubimageGrid* grid;
  LocalSpectrum model;
  std::vector<cdouble> samples;
};

ChildField prepare_child(const Subimage& child, const FrequencyGrid& kgrid, bool sdc) {
  if (!child.grid) throw ConfigError("subimage has no grid");
  const SubimageGrid& g = *child.grid;
  ChildField f{&g, LocalSpectrum(g.extents, kgrid.k_min(), kgrid.k_max()), child.values};
  if (child.values.size() != g.size()) throw ConfigError("subimage value count disagrees with its grid");
  const bool convert = sdc && !child.downconverted;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.valid[i]) {
      f.samples[i] = {};
    } else if (convert) {
      f.samples[i] *= std::polar(1.0, -f.model.phase(g.positions[i]));
    }
  }
  return f;
}

struct AxisTaps {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
  int count = 0;
};

// Returns false when the stencil leaves the lattice.
bool axis_taps(const LatticeAxis& axis, double c, InterpKernel kernel, AxisTaps& taps) {
  const double last = static_cast<double>(axis.count - 1);
  double q = (c - axis.origin) / axis.step;
  if (q < -kHullSlack || q > last + kHullSlack) return false;
  q = std::clamp(q, 0.0, last);
  if (kernel == InterpKernel::Linear) {
    auto i0 = static_cast<std::size_t>(q);
    if (i0 + 1 >= axis.count) i0 = axis.count - 2;
    const double f = q - static_cast<double>(i0);
    taps.count = 2;
    taps.index = {i0, i0 + 1, 0, 0};
    taps.weight = {1.0 - f, f, 0.0, 0.0};
    return true;
  }
  const double fl = std::floor(q);
  const double f = q - fl;
  const auto i0 = static_cast<long>(fl);
  if (i0 - 1 < 0 || i0 + 2 > static_cast<long>(axis.count - 1)) {
    // Exactly on an edge sample: no neighbours needed.
    if (f == 0.0 && i0 >= 0 && i0 <= static_cast<long>(axis.count - 1)) {
      taps.count = 1;
      taps.index = {static_cast<std::size_t>(i0), 0, 0, 0};
      taps.weight = {1.0, 0.0, 0.0, 0.0};
      return true;
    }
    return false;
  }
  taps.count = 4;
  for (int t = 0; t < 4; ++t) {
    taps.index[t] = static_cast<std::size_t>(i0 - 1 + t);
    taps.weight[t] = keys(f + 1.0 - t);
  }
  return true;
}

// Interpolated raw value of the child at p; false if the stencil is unusable.
bool sample_child(const ChildField& child, const Vec3& p, const MergeOptions& opt, cdouble& out) {
  double phi = 0.0;
  const Vec3 c = child.model.forward(p, phi);
  const SubimageGrid& g = *child.grid;
  AxisTaps tu, tv, tn;
  if (!axis_taps(g.axes[0], c.x(), opt.kernel, tu) || !axis_taps(g.axes[1], c.y(), opt.kernel, tv) ||
      !axis_taps(g.axes[2], c.z(), opt.kernel, tn)) {
    return false;
  }
  cdouble acc{};
  for (int a = 0; a < tn.count; ++a) {
    for (int b = 0; b < tv.count; ++b) {
      const double wnv = tn.weight[a] * tv.weight[b];
      const std::size_t row = (tn.index[a] * g.axes[1].count + tv.index[b]) * g.axes[0].count;
      for (int e = 0; e < tu.count; ++e) {
        const std::size_t i = row + tu.index[e];
        acc += (wnv * tu.weight[e]) * child.samples[i];
      }
    }
  }
  out = opt.spatial_downconversion ? acc * std::polar(1.0, phi) : acc;
  return true;
}

}  // namespace

SubimageGrid build_demand_grid(const SyntheticAperture& aperture, IndexRange subarray, const FrequencyGrid& kgrid,
                               double oversample, InterpKernel kernel, std::span<const Vec3> demand,
                               std::span<const std::uint8_t> demand_valid) {
  if (!(oversample >= 1.0)) throw ConfigError("oversample must be >= 1");
  if (!demand_valid.empty() && demand_valid.size() != demand.size()) {
    throw ConfigError("demand mask size mismatch");
  }
  SubimageGrid grid;
  grid.elements = subarray;
  grid.extents = aperture.extents(subarray);
  const LocalSpectrum model(grid.extents, kgrid.k_min(), kgrid.k_max());
  auto wanted = [&](std::size_t i) { return demand_valid.empty() || demand_valid[i] != 0; };

  std::vector<Vec3> coords(demand.size());
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  parallel_for(demand.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (wanted(i)) coords[i] = model.forward(demand[i]);
    }
  });
  for (std::size_t i = 0; i < demand.size(); ++i) {
    if (!wanted(i)) continue;
    lo = lo.cwiseMin(coords[i]);
    hi = hi.cwiseMax(coords[i]);
  }
  if (!lo.allFinite()) throw DomainError("subimage grid has no demand points");
  const double step = 1.0 / oversample;
  for (int a = 0; a < 3; ++a) {
    grid.axes[a].step = step;
    grid.axes[a].origin = lo[a] - 2.0 * step;
    grid.axes[a].count = static_cast<std::size_t>(std::ceil((hi[a] - lo[a]) / step)) + 5;
  }

  // Seed every stencil node with the first demand point that touches it.
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  const std::size_t nu = grid.axes[0].count, nv = grid.axes[1].count;
  std::vector<std::size_t> seed(nu * nv * grid.axes[2].count, kNone);
  for (std::size_t i = 0; i < demand.size(); ++i) {
    if (!wanted(i)) continue;
    AxisTaps tu, tv, tn;
    if (!axis_taps(grid.axes[0], coords[i].x(), kernel, tu) || !axis_taps(grid.axes[1], coords[i].y(), kernel, tv) ||
        !axis_taps(grid.axes[2], coords[i].z(), kernel, tn)) {
      throw DomainError("demand point fell outside its own lattice");
    }
    for (int a = 0; a < tn.count; ++a) {
      for (int b = 0; b < tv.count; ++b) {
        for (int e = 0; e < tu.count; ++e) {
          std::size_t& s = seed[(tn.index[a] * nv + tv.index[b]) * nu + tu.index[e]];
          if (s == kNone) s = i;
        }
      }
    }
  }

  grid.positions.assign(seed.size(), Vec3::Zero());
  grid.valid.assign(seed.size(), 0);
  grid.iterations.assign(seed.size(), 0);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < seed.size(); ++i) {
    if (seed[i] != kNone) todo.push_back(i);
  }
  parallel_for(todo.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t i = todo[t];
      const auto res = try_llt_invert(model, grid.lattice_point(i), demand[seed[i]]);
      if (res) {
        grid.positions[i] = res->position;
        grid.valid[i] = 1;
        grid.iterations[i] = static_cast<std::uint8_t>(std::min(res->iterations, 255));
      }
    }
  });
  grid.valid_count = static_cast<std::size_t>(std::count(grid.valid.begin(), grid.valid.end(), 1));
  grid.requested = todo.size();
  if (2 * grid.valid_count <= grid.requested) {
    std::ostringstream msg;
    msg << "subimage grid for elements [" << subarray.begin << ", " << subarray.end << "): "
        << grid.requested - grid.valid_count << " of " << grid.requested << " lattice inversions failed";
    throw DomainError(msg.str());
  }
  return grid;
}

std::vector<cdouble> merge_onto(const Subimage& a, const Subimage& b, std::span<const Vec3> positions,
                                std::span<const std::uint8_t> valid, const FrequencyGrid& kgrid,
                                const MergeOptions& options, MergeStats* stats) {
  if (!valid.empty() && valid.size() != positions.size()) throw ConfigError("validity mask size mismatch");
  if (a.downconverted != b.downconverted) throw ConfigError("children disagree on downconversion state");
  const ChildField fa = prepare_child(a, kgrid, options.spatial_downconversion);
  const ChildField fb = prepare_child(b, kgrid, options.spatial_downconversion);

  std::vector<cdouble> out(positions.size());
  std::vector<std::uint8_t> flagged(positions.size(), 0);
  parallel_for(positions.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (!valid.empty() && !valid[i]) continue;
      cdouble va, vb;
      if (sample_child(fa, positions[i], options, va) && sample_child(fb, positions[i], options, vb)) {
        out[i] = va + vb;
      } else {
        flagged[i] = 1;
      }
    }
  });
  if (stats) {
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (valid.empty() || valid[i]) ++stats->evaluated;
      stats->flagged += flagged[i];
    }
  }
  return out;
}

Subimage merge_pair(const Subimage& a, const Subimage& b, std::shared_ptr<const SubimageGrid> parent,
                    const FrequencyGrid& kgrid, const MergeOptions& options, MergeStats* stats) {
  if (a.grid && b.grid && parent) {
    if (a.grid->elements.end != b.grid->elements.begin || parent->elements.begin != a.grid->elements.begin ||
        parent->elements.end != b.grid->elements.end) {
      throw ConfigError("merge_pair: subimages are not the two children of the parent subarray");
    }
  } else {
    throw ConfigError("merge_pair: missing grid");
  }
  Subimage out;
  out.values = merge_onto(a, b, parent->positions, parent->valid, kgrid, options, stats);
  out.grid = std::move(parent);
  return out;
}

std::size_t FfbpReport::flagged() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.merge.flagged;
  return n;
}

std::size_t FfbpReport::evaluated() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.merge.evaluated;
  return n;
}

void check_factorization_domain(const SyntheticAperture& aperture, const SubarrayTree& tree,
                                const ImagingRegion& region) {
  for (const IndexRange& r : tree.level(1)) {
    const double hd = aperture.extents(r).half_diagonal();
    if (region.z_min < hd) {
      std::ostringstream msg;
      msg << "imaging region z_min = " << region.z_min << " m is closer than half the level-1 subarray diagonal ("
          << hd << " m); reduce the subarray size (more levels) or move the region away from the aperture";
      throw DomainError(msg.str());
    }
  }
}

ImageVolume hhffbpa_reconstruct(const DataCube& cube, const ImagingRegion& region, std::array<std::size_t, 3> dims,
                                const FfbpParams& params, FfbpReport* report) {
  params.validate();
  region.validate_against(cube.aperture);
  const auto t_start = Clock::now();
  const SubarrayTree tree = partition_subarrays(cube.aperture, params.levels);
  if (params.levels >= 2) check_factorization_domain(cube.aperture, tree, region);

  FfbpReport local;
  FfbpReport& rep = report ? *report : local;
  rep = FfbpReport{};

  auto t0 = Clock::now();
  const RangeProfileSet profiles = range_compress(cube, params.upsample);
  rep.range_compress_seconds = seconds_since(t0);

  ImageVolume vol;
  vol.grid = CartesianGrid::spanning(region, dims);
  const std::vector<Vec3> final_points = vol.grid.points();
  const FrequencyGrid& kg = cube.frequencies;
  const MergeOptions merge_opts{params.kernel, true};

  if (params.levels == 1) {
    LevelReport lr;
    lr.level = 1;
    lr.lattice_points = {final_points.size()};
    lr.valid_points = {final_points.size()};
    lr.region_points = {final_points.size()};
    t0 = Clock::now();
    vol.values = backproject(profiles, IndexRange{0, cube.element_count()}, final_points);
    lr.compute_seconds = seconds_since(t0);
    rep.levels.push_back(std::move(lr));
  } else {
    // Grids are sized top-down from what each parent evaluates, then filled
    // bottom-up.
    const int M = params.levels;
    std::vector<std::vector<std::shared_ptr<const SubimageGrid>>> grids(static_cast<std::size_t>(M));
    std::vector<double> grid_seconds(static_cast<std::size_t>(M), 0.0);
    for (int m = M - 1; m >= 1; --m) {
      const auto& ranges = tree.level(m);
      auto& level_grids = grids[static_cast<std::size_t>(m - 1)];
      level_grids.resize(ranges.size());
      t0 = Clock::now();
      for (std::size_t n = 0; n < ranges.size(); ++n) {
        std::span<const Vec3> demand = final_points;
        std::span<const std::uint8_t> demand_valid;
        if (m < M - 1) {
          const SubimageGrid& parent = *grids[static_cast<std::size_t>(m)][n / 2];
          demand = parent.positions;
          demand_valid = parent.valid;
        }
        level_grids[n] = std::make_shared<const SubimageGrid>(
            build_demand_grid(cube.aperture, ranges[n], kg, params.oversample, params.kernel, demand, demand_valid));
      }
      grid_seconds[static_cast<std::size_t>(m - 1)] = seconds_since(t0);
    }

    std::vector<Subimage> current;
    for (int m = 1; m < M; ++m) {
      const auto& level_grids = grids[static_cast<std::size_t>(m - 1)];
      LevelReport lr;
      lr.level = m;
      lr.grid_seconds = grid_seconds[static_cast<std::size_t>(m - 1)];
      for (const auto& g : level_grids) {
        lr.lattice_points.push_back(g->size());
        lr.valid_points.push_back(g->valid_count);
        lr.region_points.push_back(g->count_inside(region));
      }
      t0 = Clock::now();
      std::vector<Subimage> next(level_grids.size());
      for (std::size_t n = 0; n < level_grids.size(); ++n) {
        if (m == 1) {
          next[n] = level1_reconstruct(profiles, level_grids[n]);
        } else {
          const auto ch = tree.children(n);
          next[n] = merge_pair(current[ch[0]], current[ch[1]], level_grids[n], kg, merge_opts, &lr.merge);
        }
      }
      lr.compute_seconds = seconds_since(t0);
      current = std::move(next);
      rep.levels.push_back(std::move(lr));
    }

    LevelReport lr;
    lr.level = M;
    lr.lattice_points = {final_points.size()};
    lr.valid_points = {final_points.size()};
    lr.region_points = {final_points.size()};
    t0 = Clock::now();
    vol.values = merge_onto(current[0], current[1], final_points, {}, kg, merge_opts, &lr.merge);
    lr.compute_seconds = seconds_since(t0);
    rep.levels.push_back(std::move(lr));
  }
  rep.total_seconds = seconds_since(t_start);

  vol.provenance["algorithm"] = "hhffbpa";
  vol.provenance["levels"] = std::to_string(params.levels);
  vol.provenance["oversample"] = std::to_string(params.oversample);
  vol.provenance["kernel"] = to_string(params.kernel);
  vol.provenance["region_margin"] = std::to_string(params.region_margin);
  vol.provenance["upsample"] = std::to_string(params.upsample);
  vol.provenance["flagged_points"] = std::to_string(rep.flagged());
  vol.provenance["seconds"] = std::to_string(rep.total_seconds);
  return vol;
}

}  // namespace hhsar
