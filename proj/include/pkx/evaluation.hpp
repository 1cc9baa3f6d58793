#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pkx/exploration.hpp"

namespace pkx {

enum class Abscissa { time, distance };

struct CurvePoint {
  double time_s = 0.0;
  double distance_m = 0.0;
  double mse = 0.0;
};

// Ensemble mean/stdev of MSE-vs-progress curves on a shared abscissa grid.
struct AggregateCurve {
  Abscissa abscissa = Abscissa::time;
  double grid_step = 0.0;
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> stdev;  // population convention
  int runs = 0;
  std::string warning;  // set when leading grid points had to be dropped
};

// Mean squared difference of two co-registered rasters.
double mse(const GridSpec& spec_a, std::span<const double> a,
           const GridSpec& spec_b, std::span<const double> b);
double mse(const RateField& a, const RateField& b);
double map_mse(const KrigingMap& map, const RateField& truth);

// Per-measurement snapshots of one run, in mission order.
std::vector<CurvePoint> run_curve(const RunLog& log);

// Samples every run's curve (last observation carried forward) on the grid
// {k0*step, ..., ceil(max_last/step)*step}, where k0 skips the grid points
// preceding the latest first snapshot across runs.
AggregateCurve aggregate_runs(std::span<const RunLog> logs, Abscissa abscissa,
                              double grid_step);

// Cross product of experimental conditions, each replicated over the shared
// seed list.
struct ComparisonMatrix {
  std::vector<std::pair<std::string, RateField>> fields;  // name -> truth
  std::vector<Strategy> strategies;
  std::vector<SamplingRegime> regimes;
  std::vector<std::uint64_t> seeds;
  MissionConfig base;  // strategy/regime/seed are overwritten per cell
  double time_step_s = 60.0;
  double distance_step_m = 10.0;
  int jobs = 1;
};

struct ComparisonCell {
  std::string field;
  std::string strategy;
  std::string regime;
  std::string label;  // "<field>/<strategy>/<regime>"
  AggregateCurve by_time;
  AggregateCurve by_distance;
  double final_mean_mse = 0.0;
  double final_std_mse = 0.0;
  double mean_total_time_s = 0.0;
  double mean_total_distance_m = 0.0;
  double mean_measurements = 0.0;
  std::vector<double> final_mses;        // per completed seed
  std::vector<double> total_distances;   // per completed seed
  std::vector<double> total_times;       // per completed seed
  std::vector<long long> measurement_counts;
  std::string error;  // first failure message; empty when all seeds ran
};

struct CellDifference {
  std::string a;
  std::string b;
  double final_mean_mse_delta = 0.0;       // a - b
  double mean_total_distance_delta = 0.0;  // a - b
};

struct ComparisonReport {
  std::vector<ComparisonCell> cells;
  std::vector<CellDifference> differences;  // all ordered cell pairs a < b
  std::vector<std::uint64_t> seeds;
  double time_step_s = 0.0;
  double distance_step_m = 0.0;
  std::string stdev_convention = "population";
};

// Runs the whole matrix (optionally on `jobs` threads; results are slotted
// by index, so the report does not depend on scheduling). A failing cell
// records its error and leaves the rest of the matrix intact.
ComparisonReport compare_conditions(const ComparisonMatrix& matrix);

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);
std::string regime_label(const SamplingRegime& regime);

}  // namespace pkx
