#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hhsar/bpa.hpp"
#include "hhsar/errors.hpp"
#include "hhsar/ffbp.hpp"
#include "hhsar/io.hpp"
#include "hhsar/metrics.hpp"
#include "hhsar/parallel.hpp"
#include "hhsar/spectrum.hpp"

namespace hhsar::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + s + "' is not a number");
  }
}

std::array<std::size_t, 3> parse_dims(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 3) throw ConfigError("--dims: expected nx,ny,nz");
  std::array<std::size_t, 3> d{};
  for (int i = 0; i < 3; ++i) {
    const double v = parse_double(parts[i], "--dims");
    if (v < 1 || v != std::floor(v)) throw ConfigError("--dims: entries must be positive integers");
    d[i] = static_cast<std::size_t>(v);
  }
  return d;
}

unsigned resolve_threads(int flag) {
  if (flag > 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("HHSAR_THREADS"); env && *env) {
    const double v = parse_double(env, "HHSAR_THREADS");
    if (v < 1 || v != std::floor(v)) throw ConfigError("HHSAR_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::array<std::size_t, 3> default_dims(const DataCube& cube, const ImagingRegion& region) {
  return nyquist_dims(nyquist_rates(cube.aperture.extents(), region, cube.frequencies), region);
}

struct ReconstructRun {
  ImageVolume volume;
  std::optional<FfbpReport> report;
  double seconds = 0.0;
};

ReconstructRun reconstruct(const DataCube& cube, const ImagingRegion& region, const AlgorithmConfig& algo,
                           std::array<std::size_t, 3> dims) {
  ReconstructRun run;
  const auto t0 = std::chrono::steady_clock::now();
  if (algo.name == "bpa") {
    run.volume = bpa_reconstruct(cube, region, dims, algo.upsample);
  } else {
    FfbpParams p;
    p.levels = resolve_levels(algo, cube.aperture);
    p.oversample = algo.oversample;
    p.kernel = algo.kernel;
    p.region_margin = algo.margin;
    p.upsample = algo.upsample;
    run.report.emplace();
    run.volume = hhffbpa_reconstruct(cube, region, dims, p, &*run.report);
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(a.config);
  const SyntheticAperture ap = cfg.build_aperture();
  cfg.region.validate_against(ap);
  const Scene scene = cfg.build_scene();
  err << "simulating " << scene.scatterers.size() << " scatterers over " << ap.size() << " elements\n";
  const DataCube cube = simulate_measurement(scene, ap, cfg.frequency_grid());
  CubeMetadata meta;
  meta.region = cfg.region;
  meta.provenance["seed"] = std::to_string(cfg.seed);
  meta.provenance["scatterers"] = std::to_string(scene.scatterers.size());
  meta.provenance["config"] = fs::absolute(a.config).string();
  fs::path dest = a.out.empty() ? cfg.output.cube.value_or(fs::path{}) : fs::path(a.out);
  if (dest.empty()) throw ConfigError("--out: no output path (flag or output.cube)");
  write_cube(dest, cube, meta);
  out << "elements=" << cube.element_count() << "\n"
      << "frequencies=" << cube.frequency_count() << "\n"
      << "scatterers=" << scene.scatterers.size() << "\n";
  return kOk;
}

// ---- reconstruct ----------------------------------------------------------

struct ReconstructArgs {
  std::string algo = "hhffbpa";
  std::string in;
  std::string out;
  std::string config;
  std::optional<int> levels;
  std::optional<double> oversample;
  std::string kernel;
  std::string dims;
  std::optional<double> margin;
};

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out, std::ostream& err) {
  AlgorithmConfig algo;
  if (!a.config.empty()) algo = load_config(a.config).algorithm;
  algo.name = a.algo;
  if (a.levels) algo.levels = *a.levels;
  if (a.oversample) algo.oversample = *a.oversample;
  if (!a.kernel.empty()) algo.kernel = parse_kernel(a.kernel);
  if (a.margin) algo.margin = *a.margin;

  CubeMetadata meta;
  const DataCube cube = read_cube(a.in, &meta);
  if (!meta.region) throw ConfigError("cube '" + a.in + "' carries no imaging region");
  std::array<std::size_t, 3> dims = a.dims.empty() ? algo.dims.value_or(default_dims(cube, *meta.region))
                                                   : parse_dims(a.dims);

  err << "reconstructing with " << algo.name << " onto " << dims[0] << "x" << dims[1] << "x" << dims[2] << "\n";
  ReconstructRun run = reconstruct(cube, *meta.region, algo, dims);
  write_volume(a.out, run.volume);

  out << std::setprecision(6) << "algorithm=" << algo.name << "\nseconds=" << run.seconds << "\n";
  if (run.report) {
    for (const auto& lr : run.report->levels) {
      std::size_t lattice = 0, valid = 0;
      for (auto n : lr.lattice_points) lattice += n;
      for (auto n : lr.valid_points) valid += n;
      out << "level" << lr.level << ".subimages=" << lr.lattice_points.size() << "\n"
          << "level" << lr.level << ".lattice_points=" << lattice << "\n"
          << "level" << lr.level << ".valid_points=" << valid << "\n"
          << "level" << lr.level << ".flagged=" << lr.merge.flagged << "\n";
    }
    out << "flagged_fraction="
        << (run.report->evaluated() ? static_cast<double>(run.report->flagged()) / run.report->evaluated() : 0.0)
        << "\n";
  }
  return kOk;
}

// ---- metrics --------------------------------------------------------------

struct MetricsArgs {
  std::string ref;
  std::string test;
  std::string psf_cut;
  std::string psf_window;
  std::string out;
};

struct CutSpec {
  Axis axis;
  double c1, c2;
  std::optional<std::array<double, 2>> window;  // centre, half-width along the axis
};

std::size_t nearest_index(const CartesianGrid& g, int axis, double coord) {
  const double q = g.dims[axis] == 1 ? 0.0 : (coord - g.origin[axis]) / g.step[axis];
  const double r = std::round(q);
  if (r < -0.5 || r > static_cast<double>(g.dims[axis]) - 0.5) {
    throw ConfigError("--psf-cut: coordinate " + std::to_string(coord) + " lies outside the volume");
  }
  return static_cast<std::size_t>(r);
}

json psf_json(const ImageVolume& v, const CutSpec& cut) {
  const int a = static_cast<int>(cut.axis);
  const int o0 = a == 0 ? 1 : 0;
  const int o1 = a == 2 ? 1 : 2;
  std::vector<cdouble> profile =
      extract_cut(v, cut.axis, nearest_index(v.grid, o0, cut.c1), nearest_index(v.grid, o1, cut.c2));
  std::size_t first = 0;
  if (cut.window) {
    const std::size_t lo = nearest_index(v.grid, a, (*cut.window)[0] - (*cut.window)[1]);
    const std::size_t hi = nearest_index(v.grid, a, (*cut.window)[0] + (*cut.window)[1]);
    profile = std::vector<cdouble>(profile.begin() + static_cast<long>(lo), profile.begin() + static_cast<long>(hi) + 1);
    first = lo;
  }
  const PsfReport r = psf_metrics(profile, v.grid.step[a]);
  return {{"mainlobe_width_mm", r.mainlobe_width * 1e3},
          {"pslr_db", r.pslr},
          {"islr_db", r.islr},
          {"peak_position_m", v.grid.origin[a] + v.grid.step[a] * static_cast<double>(first + r.peak_index)}};
}

int cmd_metrics(const MetricsArgs& a, std::ostream& out, std::ostream& err) {
  const ImageVolume ref = read_volume(a.ref);
  const ImageVolume test = read_volume(a.test);
  json doc;
  doc["psnr_db"] = psnr(ref, test);
  if (!a.psf_cut.empty()) {
    const auto parts = split(a.psf_cut, ',');
    if (parts.size() != 3 || parts[0].size() != 1) throw ConfigError("--psf-cut: expected axis,c1,c2 (e.g. x,0,0.2)");
    CutSpec cut{parse_axis(parts[0][0]), parse_double(parts[1], "--psf-cut"), parse_double(parts[2], "--psf-cut"),
                std::nullopt};
    if (!a.psf_window.empty()) {
      const auto w = split(a.psf_window, ',');
      if (w.size() != 2) throw ConfigError("--psf-window: expected centre,half_width");
      cut.window = std::array<double, 2>{parse_double(w[0], "--psf-window"), parse_double(w[1], "--psf-window")};
    }
    const json r = psf_json(ref, cut), t = psf_json(test, cut);
    doc["psf"] = {{"cut", a.psf_cut},
                  {"reference", r},
                  {"test", t},
                  {"delta",
                   {{"mainlobe_width_mm", t["mainlobe_width_mm"].get<double>() - r["mainlobe_width_mm"].get<double>()},
                    {"pslr_db", t["pslr_db"].get<double>() - r["pslr_db"].get<double>()},
                    {"islr_db", t["islr_db"].get<double>() - r["islr_db"].get<double>()}}}};
  }
  if (a.out.empty()) {
    out << doc.dump(2) << "\n";
  } else {
    std::ofstream f(a.out);
    if (!f) throw IoError("cannot open '" + a.out + "' for writing");
    f << doc.dump(2) << "\n";
    err << "metrics written to " << a.out << "\n";
  }
  return kOk;
}

// ---- project --------------------------------------------------------------

struct ProjectArgs {
  std::string in;
  std::string axis = "z";
  std::string out;
  double floor_db = -40.0;
  int bit_depth = 8;
};

int cmd_project(const ProjectArgs& a, std::ostream& out, std::ostream&) {
  if (a.axis.size() != 1) throw ConfigError("--axis: expected x, y or z");
  const ImageVolume v = read_volume(a.in);
  const Image2D img = max_intensity_projection(v, parse_axis(a.axis[0]), a.floor_db);
  export_projection(img, a.out, a.bit_depth);
  out << "width=" << img.width << "\nheight=" << img.height << "\n";
  return kOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string config;
  std::string sizes = "17,25,33,49";
  std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig base = load_config(a.config);
  std::vector<int> sizes;
  for (const auto& s : split(a.sizes, ',')) {
    const double v = parse_double(s, "--sizes");
    if (v < 2 || v != std::floor(v)) throw ConfigError("--sizes: entries must be integers >= 2");
    sizes.push_back(static_cast<int>(v));
  }
  if (sizes.empty()) throw ConfigError("--sizes: empty list");
  const BenchResult res = run_bench(base, sizes, err);
  std::ofstream csv(a.out);
  if (!csv) throw IoError("cannot open '" + a.out + "' for writing");
  csv << "size,algo,seconds,predicted_ops,levels,status\n" << std::setprecision(9);
  for (const auto& r : res.rows) {
    csv << r.size << ',' << r.algo << ',' << r.seconds << ',' << r.predicted_ops << ',' << r.levels << ','
        << r.status << '\n';
  }
  if (!csv) throw IoError("write to '" + a.out + "' failed");
  out << std::setprecision(4);
  if (res.bpa_slope) out << "slope_bpa=" << *res.bpa_slope << "\n";
  if (res.hhffbpa_slope) out << "slope_hhffbpa=" << *res.hhffbpa_slope << "\n";
  if (!res.bpa_slope && !res.hhffbpa_slope) out << "slope=none\n";
  return kOk;
}

}  // namespace

std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

RunConfig scaled_config(const RunConfig& base, int side) {
  const int n0 = std::max(base.aperture.nx, base.aperture.ny);
  const double s = static_cast<double>(side) / n0;
  RunConfig c = base;
  c.aperture.nx = side;
  c.aperture.ny = side;
  c.aperture.extent = base.aperture.extent * (side - 1) / (n0 - 1);
  c.aperture.jitter.depth_amplitude *= s;
  const ImagingRegion& r = base.region;
  c.region = {r.x_min * s, r.x_max * s, r.y_min * s, r.y_max * s, r.z_min * s, r.z_max * s};
  c.frequency.count = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(base.frequency.count * s)));
  if (c.scene) {
    if (auto* g = std::get_if<PointGridSpec>(&*c.scene)) {
      g->spacing *= s;
      g->center *= s;
    } else if (auto* st = std::get_if<StarSpec>(&*c.scene)) {
      st->center *= s;
      st->diameter *= s;
    } else if (auto* pl = std::get_if<PointListSpec>(&*c.scene)) {
      for (auto& p : pl->points) p.position *= s;
    }
  }
  std::array<std::size_t, 3> base_dims = base.algorithm.dims.value_or(std::array<std::size_t, 3>{33, 33, 17});
  std::array<std::size_t, 3> dims{};
  for (int i = 0; i < 3; ++i) {
    dims[i] = static_cast<std::size_t>(std::lround((static_cast<double>(base_dims[i]) - 1.0) * s)) + 1;
  }
  c.algorithm.dims = dims;
  const int m0 = resolve_levels(base.algorithm, base.build_aperture());
  const int m = m0 + static_cast<int>(std::lround(2.0 * std::log2(s)));
  c.algorithm.levels = std::clamp(m, 1, max_levels(static_cast<std::size_t>(side) * side));
  return c;
}

BenchResult run_bench(const RunConfig& base, std::span<const int> sizes, std::ostream& log) {
  BenchResult res;
  std::vector<double> xb, yb, xf, yf;
  for (int side : sizes) {
    RunConfig cfg;
    std::optional<DataCube> cube;
    try {
      cfg = scaled_config(base, side);
      const SyntheticAperture ap = cfg.build_aperture();
      cube.emplace(simulate_measurement(cfg.build_scene(), ap, cfg.frequency_grid()));
    } catch (const std::exception& e) {
      log << "size " << side << ": setup failed: " << e.what() << "\n";
      for (const char* algo : {"bpa", "hhffbpa"}) res.rows.push_back({side, algo, NAN, NAN, 0, "error"});
      continue;
    }
    const auto dims = *cfg.algorithm.dims;
    for (const char* name : {"bpa", "hhffbpa"}) {
      BenchRow row;
      row.size = side;
      row.algo = name;
      AlgorithmConfig algo = cfg.algorithm;
      algo.name = name;
      row.levels = algo.name == "bpa" ? 1 : *algo.levels;
      try {
        FfbpParams p;
        p.levels = row.levels;
        p.oversample = algo.oversample;
        p.kernel = algo.kernel;
        row.predicted_ops = predict_op_count(cube->aperture, cfg.region, cube->frequencies, p, dims).total;
        const ReconstructRun run = reconstruct(*cube, cfg.region, algo, dims);
        row.seconds = run.seconds;
        (row.algo == "bpa" ? xb : xf).push_back(side);
        (row.algo == "bpa" ? yb : yf).push_back(row.seconds);
        log << "size " << side << " " << name << " M=" << row.levels << ": " << row.seconds << " s\n";
      } catch (const std::exception& e) {
        row.seconds = NAN;
        row.status = "error";
        log << "size " << side << " " << name << ": " << e.what() << "\n";
      }
      res.rows.push_back(row);
    }
  }
  res.bpa_slope = loglog_slope(xb, yb);
  res.hhffbpa_slope = loglog_slope(xf, yf);
  return res;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Handheld SAR imaging: simulation, BPA / HHFFBPA reconstruction and image metrics", "hhsar"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (falls back to HHSAR_THREADS)");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a measurement cube from a config");
  s->add_option("--config", sim.config, "Run config (JSON)")->required();
  s->add_option("--out", sim.out, "Cube path (defaults to output.cube)");

  ReconstructArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Reconstruct a volume from a cube");
  r->add_option("--algo", rec.algo, "bpa | hhffbpa")->check(CLI::IsMember({"bpa", "hhffbpa"}));
  r->add_option("--in", rec.in, "Input cube")->required();
  r->add_option("--out", rec.out, "Output volume")->required();
  r->add_option("--config", rec.config, "Config supplying algorithm defaults");
  r->add_option("--levels", rec.levels, "Factorization levels M");
  r->add_option("--oversample", rec.oversample, "Oversampling factor");
  r->add_option("--kernel", rec.kernel, "linear | cubic");
  r->add_option("--dims", rec.dims, "Output grid nx,ny,nz");
  r->add_option("--margin", rec.margin, "Region margin for subimage grids");

  MetricsArgs met;
  auto* m = app.add_subcommand("metrics", "Compare two volumes");
  m->add_option("--ref", met.ref, "Reference volume")->required();
  m->add_option("--test", met.test, "Test volume")->required();
  m->add_option("--psf-cut", met.psf_cut, "Cut axis and the two other coordinates, e.g. x,0,0.2");
  m->add_option("--psf-window", met.psf_window, "Restrict the cut to centre,half_width (metres)");
  m->add_option("--out", met.out, "Write the metrics document here instead of stdout");

  ProjectArgs proj;
  auto* p = app.add_subcommand("project", "Maximum-intensity projection to PGM");
  p->add_option("--in", proj.in, "Input volume")->required();
  p->add_option("--axis", proj.axis, "x | y | z");
  p->add_option("--out", proj.out, "Output PGM")->required();
  p->add_option("--floor-db", proj.floor_db, "Display floor in dB");
  p->add_option("--bit-depth", proj.bit_depth, "8 or 16");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Timing sweep over aperture sizes");
  b->add_option("--config", bench.config, "Base config")->required();
  b->add_option("--sizes", bench.sizes, "Aperture sides, comma separated");
  b->add_option("--out", bench.out, "CSV output")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }

  try {
    set_thread_count(resolve_threads(threads));
    if (s->parsed()) return cmd_simulate(sim, out, err);
    if (r->parsed()) return cmd_reconstruct(rec, out, err);
    if (m->parsed()) return cmd_metrics(met, out, err);
    if (p->parsed()) return cmd_project(proj, out, err);
    if (b->parsed()) return cmd_bench(bench, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const DomainError& e) {
    err << "numeric domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}

}  // namespace hhsar::cli
