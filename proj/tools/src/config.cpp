#include "config.hpp"

#include <fstream>
#include <set>

#include "hhsar/errors.hpp"

namespace hhsar::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!keys.count(item.key())) fail(join(path, item.key()), "unknown key");
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0)) fail(path, "must be positive");
  return x;
}

long long integer(const json& v, const std::string& path, long long lo, long long hi) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  const long long x = v.get<long long>();
  if (x < lo || x > hi) fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::string string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::array<double, 2> interval(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) fail(path, "expected [min, max]");
  const double a = number(v[0], path + "[0]"), b = number(v[1], path + "[1]");
  if (!(a < b)) fail(path, "min must be below max");
  return {a, b};
}

Vec3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected [x, y, z]");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]"), number(v[2], path + "[2]")};
}

ApertureConfig parse_aperture(const json& j, const std::string& path) {
  reject_unknown(j, path, {"nx", "ny", "extent", "jitter"});
  ApertureConfig a;
  if (auto* v = find(j, "nx")) a.nx = static_cast<int>(integer(*v, join(path, "nx"), 2, 100000));
  if (auto* v = find(j, "ny")) a.ny = static_cast<int>(integer(*v, join(path, "ny"), 2, 100000));
  if (auto* v = find(j, "extent")) a.extent = positive(*v, join(path, "extent"));
  if (auto* jj = find(j, "jitter")) {
    const std::string jp = join(path, "jitter");
    reject_unknown(*jj, jp, {"depth_amplitude", "lateral_amplitude", "tilt_share"});
    if (auto* v = find(*jj, "depth_amplitude")) {
      a.jitter.depth_amplitude = number(*v, join(jp, "depth_amplitude"));
      if (a.jitter.depth_amplitude < 0.0) fail(join(jp, "depth_amplitude"), "must be non-negative");
    }
    if (auto* v = find(*jj, "lateral_amplitude")) {
      a.jitter.lateral_amplitude = number(*v, join(jp, "lateral_amplitude"));
      if (a.jitter.lateral_amplitude < 0.0) fail(join(jp, "lateral_amplitude"), "must be non-negative");
    }
    if (auto* v = find(*jj, "tilt_share")) {
      a.jitter.tilt_share = number(*v, join(jp, "tilt_share"));
      if (a.jitter.tilt_share < 0.0 || a.jitter.tilt_share > 1.0) fail(join(jp, "tilt_share"), "must lie in [0, 1]");
    }
  }
  return a;
}

FrequencyConfig parse_frequency(const json& j, const std::string& path) {
  reject_unknown(j, path, {"f_min", "f_max", "count"});
  FrequencyConfig f;
  if (auto* v = find(j, "f_min")) f.f_min = positive(*v, join(path, "f_min"));
  if (auto* v = find(j, "f_max")) f.f_max = positive(*v, join(path, "f_max"));
  if (auto* v = find(j, "count")) f.count = static_cast<std::size_t>(integer(*v, join(path, "count"), 2, 1 << 20));
  if (!(f.f_min < f.f_max)) fail(join(path, "f_max"), "must exceed f_min");
  return f;
}

ImagingRegion parse_region(const json& j, const std::string& path) {
  reject_unknown(j, path, {"x", "y", "z"});
  for (const char* k : {"x", "y", "z"}) {
    if (!find(j, k)) fail(join(path, k), "missing");
  }
  const auto x = interval(j["x"], join(path, "x"));
  const auto y = interval(j["y"], join(path, "y"));
  const auto z = interval(j["z"], join(path, "z"));
  if (!(z[0] > 0.0)) fail(join(path, "z"), "region must lie in front of the aperture (z > 0)");
  return {x[0], x[1], y[0], y[1], z[0], z[1]};
}

std::optional<SceneSpec> parse_scene(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto* type = find(j, "type");
  if (!type) fail(join(path, "type"), "missing");
  const std::string t = string(*type, join(path, "type"));
  if (t == "empty") {
    reject_unknown(j, path, {"type"});
    return std::nullopt;
  }
  if (t == "grid") {
    reject_unknown(j, path, {"type", "counts", "spacing", "center"});
    PointGridSpec g;
    if (auto* v = find(j, "counts")) {
      if (!v->is_array() || v->size() != 3) fail(join(path, "counts"), "expected [nx, ny, nz]");
      for (int a = 0; a < 3; ++a) {
        g.counts[a] = static_cast<int>(integer((*v)[a], join(path, "counts") + "[" + std::to_string(a) + "]", 1, 1000));
      }
    }
    if (auto* v = find(j, "spacing")) g.spacing = positive(*v, join(path, "spacing"));
    if (auto* v = find(j, "center")) g.center = vec3(*v, join(path, "center"));
    return g;
  }
  if (t == "star") {
    reject_unknown(j, path, {"type", "center", "diameter", "spokes", "density"});
    StarSpec s;
    if (auto* v = find(j, "center")) s.center = vec3(*v, join(path, "center"));
    if (auto* v = find(j, "diameter")) s.diameter = positive(*v, join(path, "diameter"));
    if (auto* v = find(j, "spokes")) s.spokes = static_cast<int>(integer(*v, join(path, "spokes"), 1, 10000));
    if (auto* v = find(j, "density")) s.density = positive(*v, join(path, "density"));
    if (!(s.diameter > 0.0)) fail(join(path, "diameter"), "missing");
    if (!(s.density > 0.0)) fail(join(path, "density"), "missing");
    return s;
  }
  if (t == "points") {
    reject_unknown(j, path, {"type", "points"});
    PointListSpec list;
    const auto* pts = find(j, "points");
    if (!pts || !pts->is_array()) fail(join(path, "points"), "expected an array");
    for (std::size_t i = 0; i < pts->size(); ++i) {
      const std::string pp = join(path, "points") + "[" + std::to_string(i) + "]";
      const json& p = (*pts)[i];
      reject_unknown(p, pp, {"position", "re", "im"});
      if (!find(p, "position")) fail(join(pp, "position"), "missing");
      Scatterer s;
      s.position = vec3(p["position"], join(pp, "position"));
      double re = 1.0, im = 0.0;
      if (auto* v = find(p, "re")) re = number(*v, join(pp, "re"));
      if (auto* v = find(p, "im")) im = number(*v, join(pp, "im"));
      s.reflectivity = {re, im};
      list.points.push_back(s);
    }
    return list;
  }
  fail(join(path, "type"), "expected one of grid|star|points|empty, got '" + t + "'");
}

AlgorithmConfig parse_algorithm(const json& j, const std::string& path) {
  reject_unknown(j, path, {"name", "levels", "oversample", "kernel", "dims", "upsample", "margin"});
  AlgorithmConfig a;
  if (auto* v = find(j, "name")) {
    a.name = string(*v, join(path, "name"));
    if (a.name != "bpa" && a.name != "hhffbpa") fail(join(path, "name"), "expected bpa or hhffbpa");
  }
  if (auto* v = find(j, "levels")) a.levels = static_cast<int>(integer(*v, join(path, "levels"), 1, 30));
  if (auto* v = find(j, "oversample")) {
    a.oversample = number(*v, join(path, "oversample"));
    if (!(a.oversample >= 1.0)) fail(join(path, "oversample"), "must be >= 1");
  }
  if (auto* v = find(j, "kernel")) {
    try {
      a.kernel = parse_kernel(string(*v, join(path, "kernel")));
    } catch (const ConfigError& e) {
      fail(join(path, "kernel"), e.what());
    }
  }
  if (auto* v = find(j, "dims")) {
    if (!v->is_array() || v->size() != 3) fail(join(path, "dims"), "expected [nx, ny, nz]");
    std::array<std::size_t, 3> d{};
    for (int i = 0; i < 3; ++i) {
      d[i] = static_cast<std::size_t>(integer((*v)[i], join(path, "dims") + "[" + std::to_string(i) + "]", 1, 100000));
    }
    a.dims = d;
  }
  if (auto* v = find(j, "upsample")) a.upsample = static_cast<int>(integer(*v, join(path, "upsample"), 1, 1024));
  if (auto* v = find(j, "margin")) {
    a.margin = number(*v, join(path, "margin"));
    if (a.margin < 0.0) fail(join(path, "margin"), "must be non-negative");
  }
  return a;
}

}  // namespace

SyntheticAperture RunConfig::build_aperture() const {
  return generate_handheld_aperture(aperture.nx, aperture.ny, aperture.extent, aperture.jitter, seed);
}

Scene RunConfig::build_scene() const { return scene ? scene_from_spec(*scene, region) : Scene{}; }

RunConfig parse_config(const json& doc) {
  reject_unknown(doc, "", {"seed", "aperture", "frequency", "region", "scene", "algorithm", "output"});
  RunConfig c;
  if (auto* v = find(doc, "seed")) {
    if (!v->is_number_unsigned()) fail("seed", "expected a non-negative integer");
    c.seed = v->get<std::uint64_t>();
  }
  if (auto* v = find(doc, "aperture")) c.aperture = parse_aperture(*v, "aperture");
  if (auto* v = find(doc, "frequency")) c.frequency = parse_frequency(*v, "frequency");
  if (auto* v = find(doc, "region")) {
    c.region = parse_region(*v, "region");
  } else {
    fail("region", "missing");
  }
  if (auto* v = find(doc, "scene")) c.scene = parse_scene(*v, "scene");
  if (auto* v = find(doc, "algorithm")) c.algorithm = parse_algorithm(*v, "algorithm");
  if (auto* v = find(doc, "output")) {
    reject_unknown(*v, "output", {"cube", "volume"});
    if (auto* p = find(*v, "cube")) c.output.cube = string(*p, "output.cube");
    if (auto* p = find(*v, "volume")) c.output.volume = string(*p, "output.volume");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

int resolve_levels(const AlgorithmConfig& algo, const SyntheticAperture& aperture) {
  if (algo.levels) return *algo.levels;
  return std::min(default_levels(std::max(aperture.scan_positions, aperture.channels)), max_levels(aperture.size()));
}

}  // namespace hhsar::cli
