#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pkx/field.hpp"
#include "pkx/kriging.hpp"
#include "pkx/rng.hpp"
#include "pkx/sensor.hpp"
#include "pkx/variography.hpp"

namespace pkx {

enum class Strategy { greedy, monte_carlo, adaptive_sampling };

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  int id = -1;  // lattice index; -1 for free (resampled) points
};

// Everything one autonomous survey needs. Defaults follow the reference
// scenario: 2 h budget, 1 m/s rover, 10 m lattice.
struct MissionConfig {
  Strategy strategy = Strategy::greedy;
  SamplingRegime regime = SamplingRegime::ami(0.025);
  EnvConditions env;
  double horizon_s = 7200.0;
  double robot_speed_mps = 1.0;
  double waypoint_spacing_m = 10.0;
  std::uint64_t seed = 1;

  // Model bootstrap used until `min_fit_measurements` observations exist or
  // while the fit falls back: nugget 0, sill 1, range = quarter diagonal.
  double bootstrap_sill = 1.0;
  int min_fit_measurements = 5;

  // Empirical-variogram binning; max_lag_m <= 0 means half the field
  // diagonal.
  double bin_width_m = 10.0;
  double max_lag_m = -1.0;
  double loss_scale = 1.0;

  // Floor on the mean rate used to predict AMI dwell while planning (the
  // true mean is unknown before the first counts arrive).
  double min_planning_rate = 1.0;

  // Reported kriging-variance form; the exploration reward itself.
  VarianceConvention kv_convention = VarianceConvention::full_ok;

  // Monte-Carlo only: draw a fresh uniform candidate set (lattice-sized)
  // before every selection instead of consuming the fixed lattice.
  bool mc_resample_candidates = false;

  void validate() const;
};

// One mission step, in execution order.
struct MeasurementRecord {
  int index = 0;  // 1-based
  Waypoint target;
  double leg_distance_m = 0.0;  // travel to this target
  Measurement measurement;
  VariogramModel variogram;  // model in force after the post-update fit
  bool variogram_fallback = true;
  double m_hat = 0.0;
  double mse = 0.0;  // truth error of the updated map
  double elapsed_s = 0.0;
  double traveled_m = 0.0;
};

struct RunLog {
  MissionConfig config;
  GridSpec field_spec;
  std::vector<MeasurementRecord> records;
  std::vector<Point> trajectory;  // start pose + every reached position
  double total_time_s = 0.0;
  double total_distance_m = 0.0;
  double final_mse = 0.0;
  KrigingMap final_map;
  VariogramModel final_variogram;  // model in force when the loop exited
  double final_m_hat = 0.0;
};

// Regular lattice over the field, corners included. Per axis the number of
// points is floor(extent / spacing) + 1, stretched to span the full extent
// exactly; a degenerate axis gets a single centred point. Ids are row-major.
std::vector<Waypoint> candidate_waypoints(const GridSpec& spec,
                                          double spacing);

// Highest kriging variance wins; ties resolve to the candidate nearest
// `current`, then to the lowest index. Empty input -> nullopt.
std::optional<Waypoint> select_greedy(const KrigingMap& kv,
                                      std::span<const Waypoint> unvisited,
                                      Point current);

// Draws proportionally to kriging variance; an all-zero reward degrades to a
// uniform draw. Empty input -> nullopt.
std::optional<Waypoint> select_monte_carlo(const KrigingMap& kv,
                                           std::span<const Waypoint> unvisited,
                                           SplitMix64& rng);

// Open tour from `start` through all targets. Ten targets or fewer are
// ordered exactly (subset dynamic program); larger inputs get
// nearest-neighbour construction polished by 2-opt and single-node
// relocation until neither shortens the path. Never longer than the plain
// nearest-neighbour tour.
std::vector<Waypoint> plan_tsp_route(std::span<const Waypoint> targets,
                                     Point start);

double route_length(std::span<const Waypoint> route, Point start);

// Predicted dwell in seconds: the fixed duration under FMI; under AMI the
// tick-rounded time for max(mean_rate, min_rate) counts/s to reach the
// count target.
double expected_measurement_duration(const SamplingRegime& regime,
                                     double mean_rate, double min_rate);

struct ReplanContext {
  const KrigingMap& kv;
  std::span<const Waypoint> pool;  // unvisited candidates not already planned
  Point position;
  double remaining_time_s = 0.0;
  double expected_measurement_s = 0.0;
  double robot_speed_mps = 1.0;
  double fallback_leg_m = 10.0;  // assumed leg when the plan has no legs yet
};

// Adaptive-sampling plan maintenance: drop targets whose reward fell below
// the grid-mean kriging variance, grow back to the time-affordable plan size
// with reward-weighted draws from the pool, and re-run the tour heuristic
// from the rover's position.
std::vector<Waypoint> adaptive_replan(std::vector<Waypoint> plan,
                                      const ReplanContext& ctx,
                                      SplitMix64& rng);

// Runs the full sense-fit-krige-move loop against a truth field until the
// horizon or candidate exhaustion. Deterministic in (config, truth).
RunLog run_mission(const MissionConfig& config, const RateField& truth);

}  // namespace pkx
