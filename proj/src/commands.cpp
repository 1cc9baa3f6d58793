#include "pkx/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "pkx/errors.hpp"
#include "pkx/evaluation.hpp"
#include "pkx/exploration.hpp"
#include "pkx/io.hpp"
#include "pkx/runconfig.hpp"

namespace pkx {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw ValidationError("output directory is empty");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw ValidationError(dir + ": cannot create output directory (" +
                          ec.message() + ")");
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path + ": cannot open for writing");
  out << body;
  if (!out) throw ValidationError(path + ": write failed");
}

// The manifest pins everything a rerun needs: the fully resolved config (all
// defaults and CLI overrides applied), its hash, and the seeds. Feeding the
// embedded config back through the tool reproduces the artifacts byte for
// byte.
void write_manifest(const std::string& dir, const std::string& command,
                    const json& resolved_config,
                    const std::vector<std::uint64_t>& seeds) {
  const std::string dump = resolved_config.dump();
  const json manifest{{"tool", kToolName},
                      {"version", kToolVersion},
                      {"command", command},
                      {"config", resolved_config},
                      {"config_hash", fnv1a_hex(dump)},
                      {"seeds", seeds}};
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

json field_source_to_json(const FieldSource& src) {
  json j{{"kind", src.kind}};
  if (src.kind == "step") {
    j["grid"] = grid_spec_to_json(src.spec);
    j["border_x"] = src.border_x;
    j["rate_wet"] = src.rate_wet;
    j["rate_dry"] = src.rate_dry;
  } else if (src.kind == "grid") {
    j["path"] = src.path;
  } else {
    j["grid"] = grid_spec_to_json(src.spec);
    j["path"] = src.path;
    j["bin_width_m"] = src.bin_width_m;
    j["max_lag_m"] = src.max_lag_m;
    if (src.kind == "transect") {
      j["lines"] = src.lines;
      j["line_spacing_m"] = src.line_spacing_m;
    }
  }
  return j;
}

void apply_mission_overrides(MissionConfig& mission, const CliOverrides& cli) {
  if (cli.seed) mission.seed = *cli.seed;
  if (cli.horizon_s) mission.horizon_s = *cli.horizon_s;
  if (cli.strategy) mission.strategy = strategy_from_name(*cli.strategy);
}

}  // namespace

int cmd_surrogate(const std::string& config_path, const CliOverrides& cli) {
  return guarded([&]() -> int {
    RunConfigFile rc = parse_run_config(load_json_file(config_path));
    if (cli.output_dir) rc.output_dir = *cli.output_dir;
    if (rc.output_dir.empty())
      throw ValidationError(
          "no output directory (set config output_dir or --output-dir)");

    int clamped = 0;
    const RateField field = realize_field(rc.field, &clamped);
    ensure_dir(rc.output_dir);
    save_rate_field(field, rc.output_dir + "/surrogate.grid");

    const double mean_rate =
        std::accumulate(field.rates.begin(), field.rates.end(), 0.0) /
        static_cast<double>(field.rates.size());
    const json meta{{"kind", rc.field.kind},
                    {"grid", grid_spec_to_json(field.spec)},
                    {"nodes", field.rates.size()},
                    {"clamped_nodes", clamped},
                    {"mean_rate", mean_rate}};
    write_text_file(rc.output_dir + "/metadata.json", meta.dump(2) + "\n");

    const json resolved{{"field", field_source_to_json(rc.field)},
                        {"output_dir", rc.output_dir}};
    write_manifest(rc.output_dir, "surrogate", resolved, {});

    std::cout << "surrogate: " << field.spec.nx << "x" << field.spec.ny
              << " nodes, mean rate " << format_double(mean_rate)
              << " counts/s, " << clamped << " clamped\n";
    return 0;
  });
}

int cmd_explore(const std::string& config_path, const CliOverrides& cli) {
  return guarded([&]() -> int {
    RunConfigFile rc = parse_run_config(load_json_file(config_path));
    apply_mission_overrides(rc.mission, cli);
    if (cli.output_dir) rc.output_dir = *cli.output_dir;
    if (rc.output_dir.empty())
      throw ValidationError(
          "no output directory (set config output_dir or --output-dir)");

    const RateField truth = realize_field(rc.field);
    const RunLog log = run_mission(rc.mission, truth);

    ensure_dir(rc.output_dir);
    const std::string stem = "run_seed" + std::to_string(rc.mission.seed);
    save_run_log(log, rc.output_dir + "/" + stem + ".jsonl");
    save_trajectory_csv(log, rc.output_dir + "/" + stem + "_trajectory.csv");
    save_kriging_map(log.final_map, KrigingMethod::poisson,
                     log.final_variogram, log.final_m_hat, log.records.size(),
                     rc.output_dir, stem + "_final");

    const json resolved{{"field", field_source_to_json(rc.field)},
                        {"mission", mission_to_json(rc.mission)},
                        {"output_dir", rc.output_dir}};
    write_manifest(rc.output_dir, "explore", resolved, {rc.mission.seed});

    std::cout << "explore: " << log.records.size() << " measurements, "
              << format_double(log.total_distance_m) << " m, "
              << format_double(log.total_time_s) << " s, final mse "
              << format_double(log.final_mse) << "\n";
    return 0;
  });
}

int cmd_compare(const std::string& config_path, const CliOverrides& cli) {
  return guarded([&]() -> int {
    CompareConfigFile cc = parse_compare_config(load_json_file(config_path));
    if (cli.output_dir) cc.output_dir = *cli.output_dir;
    if (cc.output_dir.empty())
      throw ValidationError(
          "no output directory (set config output_dir or --output-dir)");

    ComparisonMatrix matrix;
    for (const auto& [name, src] : cc.fields)
      matrix.fields.emplace_back(name, realize_field(src));
    matrix.strategies = cc.strategies;
    matrix.regimes = cc.regimes;
    matrix.seeds = cc.seeds;
    matrix.base = cc.base;
    matrix.time_step_s = cc.time_step_s;
    matrix.distance_step_m = cc.distance_step_m;
    matrix.jobs = cli.jobs.value_or(1);
    if (matrix.jobs < 1)
      throw ValidationError("--jobs must be >= 1");

    const ComparisonReport report = compare_conditions(matrix);
    ensure_dir(cc.output_dir);
    save_comparison_report(report, cc.output_dir);

    json fields_json = json::object();
    for (const auto& [name, src] : cc.fields)
      fields_json[name] = field_source_to_json(src);
    json regimes_json = json::array();
    for (const auto& r : cc.regimes) regimes_json.push_back(regime_to_json(r));
    json strategies_json = json::array();
    for (Strategy s : cc.strategies) strategies_json.push_back(strategy_name(s));
    const json resolved{{"fields", fields_json},
                        {"strategies", strategies_json},
                        {"regimes", regimes_json},
                        {"seeds", cc.seeds},
                        {"mission", mission_to_json(cc.base)},
                        {"time_step_s", cc.time_step_s},
                        {"distance_step_m", cc.distance_step_m},
                        {"output_dir", cc.output_dir}};
    write_manifest(cc.output_dir, "compare", resolved, cc.seeds);

    bool failed = false;
    for (const ComparisonCell& cell : report.cells) {
      std::cout << cell.label << ": ";
      if (cell.error.empty())
        std::cout << "final mse " << format_double(cell.final_mean_mse)
                  << " +- " << format_double(cell.final_std_mse) << ", "
                  << format_double(cell.mean_total_distance_m) << " m\n";
      else {
        std::cout << "FAILED (" << cell.error << ")\n";
        failed = true;
      }
    }
    return failed ? 3 : 0;
  });
}

int cmd_export_variogram(const ExportVariogramArgs& args) {
  return guarded([&]() -> int {
    const auto obs = load_observations_csv(args.observations_path);
    const auto merged = merge_duplicate_locations(obs);
    if (merged.size() < 2)
      throw ValidationError(args.observations_path +
                            ": need at least 2 distinct locations");

    double max_lag = args.max_lag_m;
    if (!(max_lag > 0.0)) {
      double min_x = merged[0].x, max_x = merged[0].x;
      double min_y = merged[0].y, max_y = merged[0].y;
      for (const auto& o : merged) {
        min_x = std::min(min_x, o.x);
        max_x = std::max(max_x, o.x);
        min_y = std::min(min_y, o.y);
        max_y = std::max(max_y, o.y);
      }
      max_lag = 0.5 * std::hypot(max_x - min_x, max_y - min_y);
      if (!(max_lag > 0.0))
        throw ValidationError(
            "observations are co-located; pass an explicit --max-lag");
    }

    const EmpiricalVariogram emp =
        empirical_variogram(merged, args.bin_width_m, max_lag);

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
    fc.fallback = VariogramModel{0.0, std::max(max_lag / 3.0, 1e-6),
                                 std::max(var_rate, 1e-6)};
    fc.initial_sill = var_rate > 0.0 ? var_rate : -1.0;
    const VariogramFit fit = fit_gaussian_model(emp, fc);

    ensure_dir(args.output_dir);
    export_variogram_csv(emp, fit.model, args.output_dir + "/variogram.csv");
    const json meta{{"nugget", fit.model.nugget},
                    {"range", fit.model.range},
                    {"sill", fit.model.sill},
                    {"fallback_used", fit.fallback_used},
                    {"loss", fit.loss},
                    {"bin_width_m", args.bin_width_m},
                    {"max_lag_m", max_lag},
                    {"bins", emp.bins()},
                    {"m_hat", weighted_mean_rate(merged)}};
    write_text_file(args.output_dir + "/variogram_fit.json",
                    meta.dump(2) + "\n");

    std::cout << "variogram: nugget " << format_double(fit.model.nugget)
              << ", range " << format_double(fit.model.range) << ", sill "
              << format_double(fit.model.sill)
              << (fit.fallback_used ? " (fallback)" : "") << "\n";
    return 0;
  });
}

}  // namespace pkx
