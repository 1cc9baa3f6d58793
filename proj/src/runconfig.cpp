#include "pkx/runconfig.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "pkx/errors.hpp"
#include "pkx/kriging.hpp"
#include "pkx/variography.hpp"

namespace pkx {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ValidationError(where + ": unknown key \"" + it.key() + "\"");
  }
}

const json* find(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double require_num(const json& j, const std::string& where,
                   const std::string& key) {
  const json* v = find(j, key);
  if (!v) throw ValidationError(where + ": missing key \"" + key + "\"");
  if (!v->is_number())
    throw ValidationError(where + "." + key + ": expected a number");
  return v->get<double>();
}

double get_num(const json& j, const std::string& where, const std::string& key,
               double fallback) {
  return find(j, key) ? require_num(j, where, key) : fallback;
}

int get_int(const json& j, const std::string& where, const std::string& key,
            int fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer())
    throw ValidationError(where + "." + key + ": expected an integer");
  return v->get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& where,
                      const std::string& key, std::uint64_t fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!(v->is_number_unsigned() ||
        (v->is_number_integer() && v->get<long long>() >= 0)))
    throw ValidationError(where + "." + key +
                          ": expected a nonnegative integer");
  return v->get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& where, const std::string& key,
              bool fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean())
    throw ValidationError(where + "." + key + ": expected a boolean");
  return v->get<bool>();
}

std::string require_str(const json& j, const std::string& where,
                        const std::string& key) {
  const json* v = find(j, key);
  if (!v) throw ValidationError(where + ": missing key \"" + key + "\"");
  if (!v->is_string())
    throw ValidationError(where + "." + key + ": expected a string");
  return v->get<std::string>();
}

std::string get_str(const json& j, const std::string& where,
                    const std::string& key, const std::string& fallback) {
  return find(j, key) ? require_str(j, where, key) : fallback;
}

}  // namespace

GridSpec parse_grid_spec(const json& j, const std::string& where) {
  check_keys(j, where, {"origin_x", "origin_y", "cell_size", "nx", "ny"});
  GridSpec spec;
  spec.origin_x = get_num(j, where, "origin_x", 0.0);
  spec.origin_y = get_num(j, where, "origin_y", 0.0);
  spec.cell_size = require_num(j, where, "cell_size");
  spec.nx = get_int(j, where, "nx", 0);
  spec.ny = get_int(j, where, "ny", 0);
  if (!find(j, "nx") || !find(j, "ny"))
    throw ValidationError(where + ": missing key \"nx\" or \"ny\"");
  spec.validate();
  return spec;
}

SamplingRegime parse_regime(const json& j, const std::string& where) {
  const std::string kind = require_str(j, where, "kind");
  SamplingRegime regime;
  if (kind == "fmi") {
    check_keys(j, where, {"kind", "duration_s"});
    regime = SamplingRegime::fmi(require_num(j, where, "duration_s"));
  } else if (kind == "ami") {
    check_keys(j, where, {"kind", "threshold", "max_duration_s"});
    regime = SamplingRegime::ami(
        require_num(j, where, "threshold"),
        get_num(j, where, "max_duration_s", SamplingRegime{}.max_duration_s));
  } else {
    throw ValidationError(where + ".kind: expected \"fmi\" or \"ami\"");
  }
  regime.validate();
  return regime;
}

EnvConditions parse_env(const json& j, const std::string& where) {
  check_keys(j, where,
             {"cosmic_rate", "cosmic_ref", "pressure_hpa", "pressure_ref_hpa",
              "beta_per_hpa", "humidity_gm3", "humidity_ref_gm3"});
  EnvConditions env;
  env.cosmic_rate = get_num(j, where, "cosmic_rate", env.cosmic_rate);
  env.cosmic_ref = get_num(j, where, "cosmic_ref", env.cosmic_ref);
  env.pressure_hpa = get_num(j, where, "pressure_hpa", env.pressure_hpa);
  env.pressure_ref_hpa =
      get_num(j, where, "pressure_ref_hpa", env.pressure_ref_hpa);
  env.beta_per_hpa = get_num(j, where, "beta_per_hpa", env.beta_per_hpa);
  env.humidity_gm3 = get_num(j, where, "humidity_gm3", env.humidity_gm3);
  env.humidity_ref_gm3 =
      get_num(j, where, "humidity_ref_gm3", env.humidity_ref_gm3);
  env.validate();
  return env;
}

MissionConfig parse_mission(const json& j, const std::string& where) {
  check_keys(j, where,
             {"strategy", "regime", "horizon_s", "robot_speed_mps",
              "waypoint_spacing_m", "seed", "bootstrap_sill",
              "min_fit_measurements", "bin_width_m", "max_lag_m", "loss_scale",
              "min_planning_rate", "kv_convention", "mc_resample_candidates"});
  MissionConfig cfg;
  cfg.strategy =
      strategy_from_name(get_str(j, where, "strategy", "greedy"));
  if (const json* r = find(j, "regime"))
    cfg.regime = parse_regime(*r, where + ".regime");
  cfg.horizon_s = get_num(j, where, "horizon_s", cfg.horizon_s);
  cfg.robot_speed_mps =
      get_num(j, where, "robot_speed_mps", cfg.robot_speed_mps);
  cfg.waypoint_spacing_m =
      get_num(j, where, "waypoint_spacing_m", cfg.waypoint_spacing_m);
  cfg.seed = get_u64(j, where, "seed", cfg.seed);
  cfg.bootstrap_sill = get_num(j, where, "bootstrap_sill", cfg.bootstrap_sill);
  cfg.min_fit_measurements =
      get_int(j, where, "min_fit_measurements", cfg.min_fit_measurements);
  cfg.bin_width_m = get_num(j, where, "bin_width_m", cfg.bin_width_m);
  cfg.max_lag_m = get_num(j, where, "max_lag_m", cfg.max_lag_m);
  cfg.loss_scale = get_num(j, where, "loss_scale", cfg.loss_scale);
  cfg.min_planning_rate =
      get_num(j, where, "min_planning_rate", cfg.min_planning_rate);
  const std::string vc = get_str(j, where, "kv_convention", "full_ok");
  if (vc == "full_ok")
    cfg.kv_convention = VarianceConvention::full_ok;
  else if (vc == "weighted_covariance")
    cfg.kv_convention = VarianceConvention::weighted_covariance;
  else
    throw ValidationError(where +
                          ".kv_convention: expected \"full_ok\" or "
                          "\"weighted_covariance\"");
  cfg.mc_resample_candidates =
      get_bool(j, where, "mc_resample_candidates", cfg.mc_resample_candidates);
  return cfg;
}

FieldSource parse_field_source(const json& j, const std::string& where) {
  FieldSource src;
  src.kind = require_str(j, where, "kind");
  if (src.kind == "step") {
    check_keys(j, where, {"kind", "grid", "border_x", "rate_wet", "rate_dry"});
    const json* g = find(j, "grid");
    if (!g) throw ValidationError(where + ": missing key \"grid\"");
    src.spec = parse_grid_spec(*g, where + ".grid");
    src.border_x = require_num(j, where, "border_x");
    src.rate_wet = require_num(j, where, "rate_wet");
    src.rate_dry = require_num(j, where, "rate_dry");
  } else if (src.kind == "grid") {
    check_keys(j, where, {"kind", "path"});
    src.path = require_str(j, where, "path");
  } else if (src.kind == "csv" || src.kind == "transect") {
    if (src.kind == "csv")
      check_keys(j, where, {"kind", "grid", "path", "bin_width_m", "max_lag_m"});
    else
      check_keys(j, where, {"kind", "grid", "path", "lines", "line_spacing_m",
                            "bin_width_m", "max_lag_m"});
    const json* g = find(j, "grid");
    if (!g) throw ValidationError(where + ": missing key \"grid\"");
    src.spec = parse_grid_spec(*g, where + ".grid");
    src.path = require_str(j, where, "path");
    src.lines = get_int(j, where, "lines", src.lines);
    src.line_spacing_m = get_num(j, where, "line_spacing_m", src.line_spacing_m);
    src.bin_width_m = get_num(j, where, "bin_width_m", src.bin_width_m);
    src.max_lag_m = get_num(j, where, "max_lag_m", src.max_lag_m);
  } else {
    throw ValidationError(where + ".kind: unknown field kind \"" + src.kind +
                          "\" (step, grid, csv, transect)");
  }
  return src;
}

RunConfigFile parse_run_config(const json& j) {
  check_keys(j, "config", {"field", "mission", "env", "output_dir"});
  RunConfigFile rc;
  const json* f = find(j, "field");
  if (!f) throw ValidationError("config: missing key \"field\"");
  rc.field = parse_field_source(*f, "config.field");
  if (const json* m = find(j, "mission"))
    rc.mission = parse_mission(*m, "config.mission");
  if (const json* e = find(j, "env"))
    rc.mission.env = parse_env(*e, "config.env");
  rc.output_dir = get_str(j, "config", "output_dir", "");
  return rc;
}

CompareConfigFile parse_compare_config(const json& j) {
  check_keys(j, "config",
             {"fields", "strategies", "regimes", "seeds", "mission", "env",
              "time_step_s", "distance_step_m", "output_dir"});
  CompareConfigFile cc;
  const json* fields = find(j, "fields");
  if (!fields || !fields->is_object() || fields->empty())
    throw ValidationError("config.fields: expected a non-empty object");
  for (auto it = fields->begin(); it != fields->end(); ++it)
    cc.fields.emplace_back(
        it.key(), parse_field_source(*it, "config.fields." + it.key()));

  const json* strategies = find(j, "strategies");
  if (!strategies || !strategies->is_array() || strategies->empty())
    throw ValidationError("config.strategies: expected a non-empty array");
  for (const json& s : *strategies) {
    if (!s.is_string())
      throw ValidationError("config.strategies: expected strings");
    cc.strategies.push_back(strategy_from_name(s.get<std::string>()));
  }

  const json* regimes = find(j, "regimes");
  if (!regimes || !regimes->is_array() || regimes->empty())
    throw ValidationError("config.regimes: expected a non-empty array");
  for (std::size_t i = 0; i < regimes->size(); ++i)
    cc.regimes.push_back(parse_regime(
        (*regimes)[i], "config.regimes[" + std::to_string(i) + "]"));

  const json* seeds = find(j, "seeds");
  if (!seeds || !seeds->is_array() || seeds->empty())
    throw ValidationError("config.seeds: expected a non-empty array");
  for (const json& s : *seeds) {
    if (!(s.is_number_unsigned() ||
          (s.is_number_integer() && s.get<long long>() >= 0)))
      throw ValidationError("config.seeds: expected nonnegative integers");
    cc.seeds.push_back(s.get<std::uint64_t>());
  }

  if (const json* m = find(j, "mission"))
    cc.base = parse_mission(*m, "config.mission");
  if (const json* e = find(j, "env"))
    cc.base.env = parse_env(*e, "config.env");
  cc.time_step_s = get_num(j, "config", "time_step_s", cc.time_step_s);
  cc.distance_step_m =
      get_num(j, "config", "distance_step_m", cc.distance_step_m);
  cc.output_dir = get_str(j, "config", "output_dir", "");
  return cc;
}

json regime_to_json(const SamplingRegime& regime) {
  if (regime.kind == SamplingRegime::Kind::fmi)
    return json{{"kind", "fmi"}, {"duration_s", regime.fmi_duration_s}};
  return json{{"kind", "ami"},
              {"threshold", regime.ami_threshold},
              {"max_duration_s", regime.max_duration_s}};
}

json env_to_json(const EnvConditions& env) {
  return json{{"cosmic_rate", env.cosmic_rate},
              {"cosmic_ref", env.cosmic_ref},
              {"pressure_hpa", env.pressure_hpa},
              {"pressure_ref_hpa", env.pressure_ref_hpa},
              {"beta_per_hpa", env.beta_per_hpa},
              {"humidity_gm3", env.humidity_gm3},
              {"humidity_ref_gm3", env.humidity_ref_gm3}};
}

json grid_spec_to_json(const GridSpec& spec) {
  return json{{"origin_x", spec.origin_x},
              {"origin_y", spec.origin_y},
              {"cell_size", spec.cell_size},
              {"nx", spec.nx},
              {"ny", spec.ny}};
}

json mission_to_json(const MissionConfig& config) {
  return json{{"strategy", strategy_name(config.strategy)},
              {"regime", regime_to_json(config.regime)},
              {"env", env_to_json(config.env)},
              {"horizon_s", config.horizon_s},
              {"robot_speed_mps", config.robot_speed_mps},
              {"waypoint_spacing_m", config.waypoint_spacing_m},
              {"seed", config.seed},
              {"bootstrap_sill", config.bootstrap_sill},
              {"min_fit_measurements", config.min_fit_measurements},
              {"bin_width_m", config.bin_width_m},
              {"max_lag_m", config.max_lag_m},
              {"loss_scale", config.loss_scale},
              {"min_planning_rate", config.min_planning_rate},
              {"kv_convention",
               config.kv_convention == VarianceConvention::full_ok
                   ? "full_ok"
                   : "weighted_covariance"},
              {"mc_resample_candidates", config.mc_resample_candidates}};
}

json variogram_to_json(const VariogramModel& model) {
  return json{{"nugget", model.nugget},
              {"range", model.range},
              {"sill", model.sill}};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw ParseError(path + ": malformed JSON");
  return j;
}

RateField realize_field(const FieldSource& source, int* clamped_nodes) {
  if (clamped_nodes) *clamped_nodes = 0;
  if (source.kind == "step")
    return make_step_field(source.spec, source.border_x, source.rate_wet,
                           source.rate_dry);
  if (source.kind == "grid") return load_rate_field(source.path);
  if (source.kind != "csv" && source.kind != "transect")
    throw ValidationError("unknown field kind \"" + source.kind + "\"");

  std::vector<ObservationRecord> obs = load_observations_csv(source.path);
  if (source.kind == "transect")
    obs = replicate_transect(obs, source.lines, source.line_spacing_m);
  const auto merged = merge_duplicate_locations(obs);
  if (merged.size() < 2)
    throw ValidationError(source.path +
                          ": need at least 2 distinct observation locations");

  source.spec.validate();
  const double diagonal =
      std::hypot(source.spec.extent_x(), source.spec.extent_y());
  const double max_lag =
      source.max_lag_m > 0.0 ? source.max_lag_m : 0.5 * diagonal;
  const EmpiricalVariogram emp =
      empirical_variogram(merged, source.bin_width_m, max_lag);

  double mean_rate = 0.0;
  for (const auto& o : merged) mean_rate += o.rate();
  mean_rate /= static_cast<double>(merged.size());
  double var_rate = 0.0;
  for (const auto& o : merged) {
    const double d = o.rate() - mean_rate;
    var_rate += d * d;
  }
  var_rate /= static_cast<double>(merged.size());

  VariogramFitConfig fc;
  fc.fallback =
      VariogramModel{0.0, 0.25 * diagonal, std::max(var_rate, 1e-6)};
  fc.initial_sill = var_rate > 0.0 ? var_rate : -1.0;
  const VariogramFit fit = fit_gaussian_model(emp, fc);

  KrigingMap map = krige_grid(merged, fit.model, 0.0, source.spec,
                              KrigingMethod::ordinary);
  if (clamped_nodes) *clamped_nodes = map.clamped_estimates;
  RateField field;
  field.spec = source.spec;
  field.rates = std::move(map.estimate);
  return field;
}

}  // namespace pkx
