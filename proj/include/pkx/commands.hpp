#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace pkx {

inline constexpr const char* kToolName = "pkexplore";
inline constexpr const char* kToolVersion = "0.1.0";

// Command-line overrides; set fields win over config-file values, which win
// over built-in defaults.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon_s;
  std::optional<std::string> strategy;
  std::optional<std::string> output_dir;
  std::optional<int> jobs;
};

struct ExportVariogramArgs {
  std::string observations_path;
  std::string output_dir;
  double bin_width_m = 10.0;
  double max_lag_m = -1.0;  // <= 0: half the observation bounding-box diagonal
};

// Each returns a process exit code: 0 ok, 2 invalid input, 3 runtime
// failure. Errors are printed to stderr.
int cmd_surrogate(const std::string& config_path, const CliOverrides& cli);
int cmd_explore(const std::string& config_path, const CliOverrides& cli);
int cmd_compare(const std::string& config_path, const CliOverrides& cli);
int cmd_export_variogram(const ExportVariogramArgs& args);

}  // namespace pkx
