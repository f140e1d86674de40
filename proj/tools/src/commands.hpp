#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"

namespace hhsar::cli {

enum ExitCode : int { kOk = 0, kOther = 1, kConfig = 2, kIo = 3, kDomain = 4 };

/// Runs the command line (without the program name). Machine-readable
/// results go to `out`, diagnostics to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct BenchRow {
  int size = 0;
  std::string algo;
  double seconds = 0.0;
  double predicted_ops = 0.0;
  int levels = 1;
  std::string status = "ok";
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::optional<double> bpa_slope;
  std::optional<double> hhffbpa_slope;
};

/// `base` rescaled to an aperture side of `side` elements at the base pitch:
/// geometry, scene and jitter scale with side/base_side, voxel counts and the
/// frequency count grow in proportion, and the level count follows 2 log2.
RunConfig scaled_config(const RunConfig& base, int side);

BenchResult run_bench(const RunConfig& base, std::span<const int> sizes, std::ostream& log);

/// Least-squares slope of log(y) against log(x); nullopt for fewer than two points.
std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace hhsar::cli
