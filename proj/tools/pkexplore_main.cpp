#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pkx/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"count-rate field mapping: surrogate fields, autonomous "
               "exploration, condition comparison"};
  app.require_subcommand(1);

  std::string surrogate_config, explore_config, compare_config;
  pkx::CliOverrides cli;
  pkx::ExportVariogramArgs vg;

  auto* surrogate = app.add_subcommand(
      "surrogate", "build a rate field from a configured source");
  surrogate->add_option("-c,--config", surrogate_config, "JSON config file")
      ->required();
  surrogate->add_option("-o,--output-dir", cli.output_dir,
                        "override the config's output directory");

  auto* explore = app.add_subcommand(
      "explore", "run one autonomous exploration mission");
  explore->add_option("-c,--config", explore_config, "JSON config file")
      ->required();
  explore->add_option("-o,--output-dir", cli.output_dir,
                      "override the config's output directory");
  explore->add_option("--seed", cli.seed, "override the mission seed");
  explore->add_option("--horizon", cli.horizon_s,
                      "override the mission horizon in seconds");
  explore->add_option(
      "--strategy", cli.strategy,
      "override the strategy (greedy, monte_carlo, adaptive_sampling)");

  auto* compare = app.add_subcommand(
      "compare", "run a strategy/regime/field comparison matrix");
  compare->add_option("-c,--config", compare_config, "JSON config file")
      ->required();
  compare->add_option("-o,--output-dir", cli.output_dir,
                      "override the config's output directory");
  compare->add_option("-j,--jobs", cli.jobs, "worker threads (default 1)");

  auto* exportvg = app.add_subcommand(
      "export-variogram", "fit and export an empirical variogram from a CSV");
  exportvg
      ->add_option("-i,--observations", vg.observations_path,
                   "observations CSV (x,y,duration_s,counts)")
      ->required();
  exportvg->add_option("-o,--output-dir", vg.output_dir, "output directory")
      ->required();
  exportvg->add_option("--bin-width", vg.bin_width_m,
                       "lag bin width in metres (default 10)");
  exportvg->add_option("--max-lag", vg.max_lag_m,
                       "max lag in metres (default: half the bounding-box "
                       "diagonal)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // bad command line is invalid input
  }

  if (surrogate->parsed()) return pkx::cmd_surrogate(surrogate_config, cli);
  if (explore->parsed()) return pkx::cmd_explore(explore_config, cli);
  if (compare->parsed()) return pkx::cmd_compare(compare_config, cli);
  if (exportvg->parsed()) return pkx::cmd_export_variogram(vg);
  return 2;
}
