#include "hhsar/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hhsar/errors.hpp"

namespace hhsar {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kCubeSchema = "hhsar.cube";
constexpr const char* kVolumeSchema = "hhsar.volume";

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

void write_payload(const fs::path& path, const std::vector<cdouble>& values) {
  std::vector<std::uint32_t> words(values.size() * 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    words[2 * i] = to_little(std::bit_cast<std::uint32_t>(static_cast<float>(values[i].real())));
    words[2 * i + 1] = to_little(std::bit_cast<std::uint32_t>(static_cast<float>(values[i].imag())));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<cdouble> read_payload(const fs::path& path, std::size_t count) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw IoError("cannot stat payload '" + path.string() + "': " + ec.message());
  const std::uintmax_t expected = static_cast<std::uintmax_t>(count) * 8;
  if (size < expected) {
    throw TruncatedPayloadError("payload '" + path.string() + "' holds " + std::to_string(size) +
                                " bytes, expected " + std::to_string(expected));
  }
  if (size > expected) {
    throw DimensionMismatchError("payload '" + path.string() + "' holds " + std::to_string(size) +
                                 " bytes but the sidecar dimensions imply " + std::to_string(expected));
  }
  std::vector<std::uint32_t> words(count * 2);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(expected));
  if (!in) throw TruncatedPayloadError("short read from '" + path.string() + "'");
  std::vector<cdouble> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = {std::bit_cast<float>(to_little(words[2 * i])), std::bit_cast<float>(to_little(words[2 * i + 1]))};
  }
  return values;
}

void write_sidecar(const fs::path& path, const json& doc) {
  std::ofstream out(sidecar_path(path), std::ios::trunc);
  if (!out) throw IoError("cannot open '" + sidecar_path(path).string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write to '" + sidecar_path(path).string() + "' failed");
}

json read_sidecar(const fs::path& path, const char* schema, int version) {
  const fs::path side = sidecar_path(path);
  std::ifstream in(side);
  if (!in) throw IoError("cannot open sidecar '" + side.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError("sidecar '" + side.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("schema", std::string{}) != schema) {
    throw SchemaError("sidecar '" + side.string() + "' is not a " + schema + " document");
  }
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != version) {
    throw SchemaError("sidecar '" + side.string() + "' has unsupported schema_version (expected " +
                      std::to_string(version) + ")");
  }
  return doc;
}

json region_json(const ImagingRegion& r) {
  return {{"x", {r.x_min, r.x_max}}, {"y", {r.y_min, r.y_max}}, {"z", {r.z_min, r.z_max}}};
}

ImagingRegion region_from_json(const json& j) {
  ImagingRegion r;
  r.x_min = j.at("x").at(0);
  r.x_max = j.at("x").at(1);
  r.y_min = j.at("y").at(0);
  r.y_max = j.at("y").at(1);
  r.z_min = j.at("z").at(0);
  r.z_max = j.at("z").at(1);
  return r;
}

json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

template <class F>
auto schema_guard(const fs::path& path, F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw SchemaError("sidecar '" + sidecar_path(path).string() + "' is missing or has malformed fields: " +
                      e.what());
  }
}

}  // namespace

fs::path sidecar_path(const fs::path& payload) {
  fs::path p = payload;
  p += ".json";
  return p;
}

void write_cube(const fs::path& path, const DataCube& cube, const CubeMetadata& meta) {
  json positions = json::array();
  for (const Vec3& e : cube.aperture.elements) positions.push_back(vec_json(e));
  json doc = {
      {"schema", kCubeSchema},
      {"schema_version", kCubeSchemaVersion},
      {"layout", "element-major, frequency fastest; float32 re/im little-endian"},
      {"dims", {{"elements", cube.element_count()}, {"frequencies", cube.frequency_count()}}},
      {"units", {{"frequency", "Hz"}, {"position", "m"}}},
      {"frequency",
       {{"f_min", cube.frequencies.f_min()}, {"f_max", cube.frequencies.f_max()},
        {"count", cube.frequencies.count()}}},
      {"aperture",
       {{"scan_positions", cube.aperture.scan_positions},
        {"channels", cube.aperture.channels},
        {"positions", std::move(positions)}}},
      {"provenance", meta.provenance},
  };
  if (meta.region) doc["region"] = region_json(*meta.region);
  write_payload(path, cube.values);
  write_sidecar(path, doc);
}

DataCube read_cube(const fs::path& path, CubeMetadata* meta) {
  const json doc = read_sidecar(path, kCubeSchema, kCubeSchemaVersion);
  return schema_guard(path, [&] {
    const auto ne = doc.at("dims").at("elements").get<std::size_t>();
    const auto nf = doc.at("dims").at("frequencies").get<std::size_t>();
    const json& fr = doc.at("frequency");
    const auto count = fr.at("count").get<std::size_t>();
    if (count != nf) throw DimensionMismatchError("cube sidecar: frequency count disagrees with dims");
    SyntheticAperture ap;
    ap.scan_positions = doc.at("aperture").at("scan_positions").get<std::size_t>();
    ap.channels = doc.at("aperture").at("channels").get<std::size_t>();
    for (const json& p : doc.at("aperture").at("positions")) ap.elements.push_back(vec_from_json(p));
    if (ap.elements.size() != ne || ap.scan_positions * ap.channels != ne) {
      throw DimensionMismatchError("cube sidecar: aperture layout disagrees with dims");
    }
    DataCube cube(std::move(ap), FrequencyGrid(fr.at("f_min").get<double>(), fr.at("f_max").get<double>(), count));
    cube.values = read_payload(path, ne * nf);
    if (meta) {
      meta->region.reset();
      if (doc.contains("region")) meta->region = region_from_json(doc["region"]);
      meta->provenance = doc.value("provenance", std::map<std::string, std::string>{});
    }
    return cube;
  });
}

void write_volume(const fs::path& path, const ImageVolume& volume) {
  const auto& g = volume.grid;
  if (volume.values.size() != g.size()) throw DimensionMismatchError("volume value count disagrees with its grid");
  const json doc = {
      {"schema", kVolumeSchema},
      {"schema_version", kVolumeSchemaVersion},
      {"layout", "x fastest, then y, then z; float32 re/im little-endian"},
      {"dims", {g.dims[0], g.dims[1], g.dims[2]}},
      {"units", {{"position", "m"}}},
      {"grid", {{"origin", vec_json(g.origin)}, {"step", vec_json(g.step)}}},
      {"provenance", volume.provenance},
  };
  write_payload(path, volume.values);
  write_sidecar(path, doc);
}

ImageVolume read_volume(const fs::path& path) {
  const json doc = read_sidecar(path, kVolumeSchema, kVolumeSchemaVersion);
  return schema_guard(path, [&] {
    ImageVolume v;
    const json& d = doc.at("dims");
    if (!d.is_array() || d.size() != 3) throw DimensionMismatchError("volume sidecar: dims must have 3 entries");
    v.grid.dims = {d[0].get<std::size_t>(), d[1].get<std::size_t>(), d[2].get<std::size_t>()};
    if (v.grid.size() == 0) throw DimensionMismatchError("volume sidecar: empty dims");
    v.grid.origin = vec_from_json(doc.at("grid").at("origin"));
    v.grid.step = vec_from_json(doc.at("grid").at("step"));
    v.provenance = doc.value("provenance", std::map<std::string, std::string>{});
    v.values = read_payload(path, v.grid.size());
    return v;
  });
}

void export_projection(const Image2D& image, const fs::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ConfigError("PGM bit depth must be 8 or 16");
  if (image.pixels.size() != image.width * image.height || image.pixels.empty()) {
    throw ConfigError("image dimensions disagree with its pixel count");
  }
  const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
  std::string body;
  body.reserve(image.pixels.size() * (bit_depth / 8));
  for (double v : image.pixels) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("projection pixel value outside [0, 1]");
    const auto q = static_cast<unsigned>(std::floor(v * maxval + 0.5));
    if (bit_depth == 16) body.push_back(static_cast<char>(q >> 8));
    body.push_back(static_cast<char>(q & 0xFFu));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << image.width << ' ' << image.height << '\n' << static_cast<int>(maxval) << '\n';
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Image2D read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string magic;
  std::size_t w = 0, h = 0;
  unsigned maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (!in || magic != "P5" || w == 0 || h == 0 || maxval == 0 || maxval > 65535) {
    throw SchemaError("'" + path.string() + "' is not a binary PGM");
  }
  in.get();
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  std::string body(w * h * bytes, '\0');
  in.read(body.data(), static_cast<std::streamsize>(body.size()));
  if (!in) throw TruncatedPayloadError("PGM '" + path.string() + "' is truncated");
  Image2D img{w, h, std::vector<double>(w * h)};
  for (std::size_t i = 0; i < w * h; ++i) {
    unsigned q = static_cast<unsigned char>(body[i * bytes]);
    if (bytes == 2) q = (q << 8) | static_cast<unsigned char>(body[i * bytes + 1]);
    img.pixels[i] = static_cast<double>(q) / maxval;
  }
  return img;
}

std::string to_json(const OpCountReport& r) {
  const json doc = {
      {"c1", r.c1},
      {"c2", r.c2},
      {"c3", r.c3},
      {"elements", r.elements},
      {"frequencies", r.frequencies},
      {"levels", r.levels},
      {"level_samples", r.level_samples},
      {"range_compression", r.range_compression},
      {"backprojection", r.backprojection},
      {"interpolation", r.interpolation},
      {"total", r.total},
      {"approx_backprojection", r.approx_backprojection},
      {"approx_interpolation", r.approx_interpolation},
      {"approx_total", r.approx_total},
      {"measured_seconds", r.measured_seconds},
  };
  return doc.dump(2);
}

std::string to_json(const PsfReport& r) {
  const json doc = {{"mainlobe_width_mm", r.mainlobe_width * 1e3},
                    {"pslr_db", r.pslr},
                    {"islr_db", r.islr},
                    {"peak_position_m", r.peak_position}};
  return doc.dump(2);
}

}  // namespace hhsar
