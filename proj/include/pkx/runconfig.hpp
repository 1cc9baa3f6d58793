#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pkx/evaluation.hpp"
#include "pkx/exploration.hpp"
#include "pkx/field.hpp"

namespace pkx {

// Where a truth / surrogate field comes from.
//   kind "step":     synthetic two-plateau field on `spec`
//   kind "grid":     a previously saved raster file
//   kind "csv":      sparse observations kriged onto `spec`
//   kind "transect": like csv, but the records are one line replicated into
//                    `lines` parallel lines `line_spacing_m` apart first
struct FieldSource {
  std::string kind = "step";
  GridSpec spec;
  double border_x = 0.0;  // step
  double rate_wet = 0.0;  // step
  double rate_dry = 0.0;  // step
  std::string path;       // grid / csv / transect
  int lines = 6;                 // transect
  double line_spacing_m = 10.0;  // transect
  double bin_width_m = 10.0;     // csv / transect variogram fit
  double max_lag_m = -1.0;       // <= 0: half the grid diagonal
};

struct RunConfigFile {
  FieldSource field;
  MissionConfig mission;
  std::string output_dir;
};

struct CompareConfigFile {
  std::vector<std::pair<std::string, FieldSource>> fields;
  std::vector<Strategy> strategies;
  std::vector<SamplingRegime> regimes;
  std::vector<std::uint64_t> seeds;
  MissionConfig base;
  double time_step_s = 60.0;
  double distance_step_m = 10.0;
  std::string output_dir;
};

// Strict parsers: an unrecognized key anywhere raises ValidationError naming
// the key, so typos cannot silently fall back to defaults.
GridSpec parse_grid_spec(const nlohmann::json& j, const std::string& where);
SamplingRegime parse_regime(const nlohmann::json& j, const std::string& where);
EnvConditions parse_env(const nlohmann::json& j, const std::string& where);
MissionConfig parse_mission(const nlohmann::json& j, const std::string& where);
FieldSource parse_field_source(const nlohmann::json& j,
                               const std::string& where);
RunConfigFile parse_run_config(const nlohmann::json& j);
CompareConfigFile parse_compare_config(const nlohmann::json& j);

nlohmann::json regime_to_json(const SamplingRegime& regime);
nlohmann::json env_to_json(const EnvConditions& env);
nlohmann::json grid_spec_to_json(const GridSpec& spec);
nlohmann::json mission_to_json(const MissionConfig& config);
nlohmann::json variogram_to_json(const VariogramModel& model);

// Reads and parses a JSON file (ParseError on unreadable/invalid input).
nlohmann::json load_json_file(const std::string& path);

// Builds the truth / surrogate field a source describes. For kriged sources
// `clamped_nodes` (if non-null) receives the number of negative estimates
// clamped to zero.
RateField realize_field(const FieldSource& source, int* clamped_nodes = nullptr);

}  // namespace pkx
