#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "hhsar/ffbp.hpp"
#include "hhsar/model.hpp"
#include "hhsar/simulator.hpp"

namespace hhsar::cli {

struct ApertureConfig {
  int nx = 33;
  int ny = 33;
  double extent = 0.15;
  JitterSpec jitter;
};

struct FrequencyConfig {
  double f_min = 12e9;
  double f_max = 15e9;
  std::size_t count = 16;
};

struct AlgorithmConfig {
  std::string name = "hhffbpa";
  std::optional<int> levels;
  double oversample = 1.4;
  InterpKernel kernel = InterpKernel::Linear;
  std::optional<std::array<std::size_t, 3>> dims;
  int upsample = 8;
  double margin = 0.25;
};

struct OutputConfig {
  std::optional<std::filesystem::path> cube;
  std::optional<std::filesystem::path> volume;
};

struct RunConfig {
  std::uint64_t seed = 0;
  ApertureConfig aperture;
  FrequencyConfig frequency;
  ImagingRegion region;
  std::optional<SceneSpec> scene;  // empty scene when absent
  AlgorithmConfig algorithm;
  OutputConfig output;

  FrequencyGrid frequency_grid() const { return {frequency.f_min, frequency.f_max, frequency.count}; }
  SyntheticAperture build_aperture() const;
  Scene build_scene() const;
};

/// Parses and validates a config document; ConfigError messages name the
/// offending field by its dotted path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Levels used when the config leaves them unset.
int resolve_levels(const AlgorithmConfig& algo, const SyntheticAperture& aperture);

}  // namespace hhsar::cli
