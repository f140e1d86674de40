#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "hhsar/bpa.hpp"
#include "hhsar/ffbp.hpp"
#include "hhsar/metrics.hpp"
#include "hhsar/simulator.hpp"

namespace hhsar {

// On-disk layout: the payload at PATH holds little-endian float32 (re, im)
// pairs, innermost index fastest; PATH + ".json" holds the metadata.

inline constexpr int kCubeSchemaVersion = 1;
inline constexpr int kVolumeSchemaVersion = 1;

struct CubeMetadata {
  std::optional<ImagingRegion> region;
  std::map<std::string, std::string> provenance;
};

std::filesystem::path sidecar_path(const std::filesystem::path& payload);

void write_cube(const std::filesystem::path& path, const DataCube& cube, const CubeMetadata& meta = {});
DataCube read_cube(const std::filesystem::path& path, CubeMetadata* meta = nullptr);

void write_volume(const std::filesystem::path& path, const ImageVolume& volume);
ImageVolume read_volume(const std::filesystem::path& path);

/// Binary PGM (P5); values must lie in [0, 1]. bit_depth is 8 or 16.
void export_projection(const Image2D& image, const std::filesystem::path& path, int bit_depth = 8);
/// Reads a P5 file back, scaled to [0, 1].
Image2D read_pgm(const std::filesystem::path& path);

std::string to_json(const OpCountReport& report);
std::string to_json(const PsfReport& report);

}  // namespace hhsar
