#include "pkx/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "pkx/errors.hpp"
#include "pkx/evaluation.hpp"

namespace pkx {

namespace {

bool finite(double v) { return std::isfinite(v); }

double kv_at(const KrigingMap& kv, const Waypoint& wp) {
  return kv.variance_at(wp.x, wp.y);
}

// Index draw proportional to (non-negative) kriging variance; a flat-zero
// reward degrades to a uniform pick. Pool must be non-empty.
std::size_t weighted_pick(std::span<const Waypoint> pool, const KrigingMap& kv,
                          SplitMix64& rng) {
  std::vector<double> w(pool.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    w[i] = std::max(0.0, kv_at(kv, pool[i]));
    total += w[i];
  }
  if (!(total > 0.0))
    return std::min(static_cast<std::size_t>(rng.uniform() * pool.size()),
                    pool.size() - 1);
  const double r = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    acc += w[i];
    if (r < acc) return i;
  }
  return pool.size() - 1;
}

std::vector<double> axis_points(double origin, double extent, double spacing) {
  const int n = static_cast<int>(std::floor(extent / spacing + 1e-9)) + 1;
  std::vector<double> xs;
  if (n <= 1) {
    xs.push_back(origin + extent / 2.0);
    return xs;
  }
  const double step = extent / (n - 1);
  for (int k = 0; k + 1 < n; ++k) xs.push_back(origin + k * step);
  // written as the same expression contains() compares against, so the far
  // corner tests as in-bounds exactly
  xs.push_back(origin + extent);
  return xs;
}

}  // namespace

void MissionConfig::validate() const {
  regime.validate();
  env.validate();
  if (!finite(horizon_s) || horizon_s < 0.0)
    throw ValidationError("horizon must be >= 0");
  if (!finite(robot_speed_mps) || robot_speed_mps <= 0.0)
    throw ValidationError("robot speed must be > 0");
  if (!finite(waypoint_spacing_m) || waypoint_spacing_m <= 0.0)
    throw ValidationError("waypoint spacing must be > 0");
  if (!finite(bootstrap_sill) || bootstrap_sill <= 0.0)
    throw ValidationError("bootstrap sill must be > 0");
  if (min_fit_measurements < 1)
    throw ValidationError("min fit measurements must be >= 1");
  if (!finite(bin_width_m) || bin_width_m <= 0.0)
    throw ValidationError("variogram bin width must be > 0");
  if (!finite(loss_scale) || loss_scale <= 0.0)
    throw ValidationError("fit loss scale must be > 0");
  if (!finite(min_planning_rate) || min_planning_rate <= 0.0)
    throw ValidationError("planning rate floor must be > 0");
}

std::vector<Waypoint> candidate_waypoints(const GridSpec& spec,
                                          double spacing) {
  spec.validate();
  if (!finite(spacing) || spacing <= 0.0)
    throw ValidationError("waypoint spacing must be > 0");
  const auto xs = axis_points(spec.origin_x, spec.extent_x(), spacing);
  const auto ys = axis_points(spec.origin_y, spec.extent_y(), spacing);
  std::vector<Waypoint> out;
  out.reserve(xs.size() * ys.size());
  int id = 0;
  for (double y : ys)
    for (double x : xs) out.push_back({x, y, id++});
  return out;
}

std::optional<Waypoint> select_greedy(const KrigingMap& kv,
                                      std::span<const Waypoint> unvisited,
                                      Point current) {
  if (unvisited.empty()) return std::nullopt;
  std::size_t best = 0;
  double best_v = -1.0;
  double best_d = 0.0;
  for (std::size_t i = 0; i < unvisited.size(); ++i) {
    const double v = kv_at(kv, unvisited[i]);
    const double d =
        std::hypot(unvisited[i].x - current.x, unvisited[i].y - current.y);
    if (v > best_v || (v == best_v && d < best_d)) {
      best = i;
      best_v = v;
      best_d = d;
    }
  }
  return unvisited[best];
}

std::optional<Waypoint> select_monte_carlo(const KrigingMap& kv,
                                           std::span<const Waypoint> unvisited,
                                           SplitMix64& rng) {
  if (unvisited.empty()) return std::nullopt;
  return unvisited[weighted_pick(unvisited, kv, rng)];
}

double route_length(std::span<const Waypoint> route, Point start) {
  double len = 0.0;
  Point pos = start;
  for (const Waypoint& wp : route) {
    len += std::hypot(wp.x - pos.x, wp.y - pos.y);
    pos = {wp.x, wp.y};
  }
  return len;
}

std::vector<Waypoint> plan_tsp_route(std::span<const Waypoint> targets,
                                     Point start) {
  std::vector<Waypoint> route;
  if (targets.empty()) return route;
  const std::size_t m = targets.size();
  const auto dist = [](Point a, Point b) {
    return std::hypot(b.x - a.x, b.y - a.y);
  };

  // Small inputs get the exact subset dynamic program (open path, free
  // endpoint). Late-mission replans are small, and exactness there is cheap:
  // at ten targets the table holds 10 * 2^10 states.
  if (m <= 10) {
    const int n = static_cast<int>(m);
    const std::uint32_t full = (1u << n) - 1u;
    std::vector<double> leg(static_cast<std::size_t>(n) * n);
    std::vector<double> first(n);
    for (int i = 0; i < n; ++i) {
      first[i] = dist(start, {targets[i].x, targets[i].y});
      for (int j = 0; j < n; ++j)
        leg[static_cast<std::size_t>(i) * n + j] = dist(
            {targets[i].x, targets[i].y}, {targets[j].x, targets[j].y});
    }
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> cost((static_cast<std::size_t>(full) + 1) * n, inf);
    std::vector<signed char> prev(cost.size(), -1);
    for (int i = 0; i < n; ++i)
      cost[(static_cast<std::size_t>(1) << i) * n + i] = first[i];
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      for (int last = 0; last < n; ++last) {
        if (!(mask & (1u << last))) continue;
        const double c = cost[static_cast<std::size_t>(mask) * n + last];
        if (!(c < inf)) continue;
        for (int nxt = 0; nxt < n; ++nxt) {
          if (mask & (1u << nxt)) continue;
          const std::size_t at =
              static_cast<std::size_t>(mask | (1u << nxt)) * n + nxt;
          const double cand = c + leg[static_cast<std::size_t>(last) * n + nxt];
          if (cand < cost[at]) {
            cost[at] = cand;
            prev[at] = static_cast<signed char>(last);
          }
        }
      }
    }
    int last = 0;
    for (int i = 1; i < n; ++i)
      if (cost[static_cast<std::size_t>(full) * n + i] <
          cost[static_cast<std::size_t>(full) * n + last])
        last = i;
    std::vector<int> order;
    std::uint32_t mask = full;
    while (last >= 0) {
      order.push_back(last);
      const signed char p = prev[static_cast<std::size_t>(mask) * n + last];
      mask ^= 1u << last;
      last = p;
    }
    std::reverse(order.begin(), order.end());
    route.reserve(m);
    for (int i : order) route.push_back(targets[i]);
    return route;
  }

  // nearest-neighbour construction
  std::vector<Waypoint> remaining(targets.begin(), targets.end());
  Point pos = start;
  while (!remaining.empty()) {
    std::size_t best = 0;
    double best_d = std::hypot(remaining[0].x - pos.x, remaining[0].y - pos.y);
    for (std::size_t i = 1; i < remaining.size(); ++i) {
      const double d =
          std::hypot(remaining[i].x - pos.x, remaining[i].y - pos.y);
      if (d < best_d) {
        best = i;
        best_d = d;
      }
    }
    route.push_back(remaining[best]);
    pos = {remaining[best].x, remaining[best].y};
    remaining.erase(remaining.begin() + best);
  }

  // node(-1) is the fixed start pose
  const auto node = [&](std::ptrdiff_t idx) -> Point {
    return idx < 0 ? start : Point{route[idx].x, route[idx].y};
  };
  const auto sd = static_cast<std::ptrdiff_t>(m);

  // Local search until a full pass finds nothing. 2-opt reverses route[i..j],
  // which changes only the edge into i and (when it exists) the one out of j;
  // the relocation sweep moves single nodes, which a reversal cannot express
  // on an open path and which 2-opt alone gets stuck without.
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::ptrdiff_t i = 0; i < sd; ++i) {
      for (std::ptrdiff_t j = i + 1; j < sd; ++j) {
        double before = dist(node(i - 1), node(i));
        double after = dist(node(i - 1), node(j));
        if (j + 1 < sd) {
          before += dist(node(j), node(j + 1));
          after += dist(node(i), node(j + 1));
        }
        if (after + 1e-12 < before) {
          std::reverse(route.begin() + i, route.begin() + j + 1);
          improved = true;
        }
      }
    }
    for (std::ptrdiff_t i = 0; i < sd; ++i) {
      double rem = -dist(node(i - 1), node(i));
      if (i + 1 < sd)
        rem += dist(node(i - 1), node(i + 1)) - dist(node(i), node(i + 1));
      for (std::ptrdiff_t k = -1; k < sd; ++k) {
        if (k == i || k + 1 == i) continue;  // no-op positions
        double ins = dist(node(k), node(i));
        if (k + 1 < sd)
          ins += dist(node(i), node(k + 1)) - dist(node(k), node(k + 1));
        if (rem + ins < -1e-12) {
          const Waypoint moved = route[i];
          route.erase(route.begin() + i);
          route.insert(route.begin() + (k < i ? k + 1 : k), moved);
          improved = true;
          break;  // indices shifted; rescore this slot on the next pass
        }
      }
    }
  }
  return route;
}

double expected_measurement_duration(const SamplingRegime& regime,
                                     double mean_rate, double min_rate) {
  regime.validate();
  if (regime.kind == SamplingRegime::Kind::fmi) return regime.fmi_duration_s;
  if (!finite(min_rate) || min_rate <= 0.0)
    throw ValidationError("planning rate floor must be > 0");
  const double rate = std::max(mean_rate, min_rate);
  const double seconds = regime.ami_count_target() / rate;
  double t = kTickSeconds * std::ceil(seconds / kTickSeconds - 1e-9);
  t = std::max(t, kTickSeconds);
  const double cap =
      kTickSeconds * std::floor(regime.max_duration_s / kTickSeconds + 1e-9);
  return std::min(t, cap);
}

std::vector<Waypoint> adaptive_replan(std::vector<Waypoint> plan,
                                      const ReplanContext& ctx,
                                      SplitMix64& rng) {
  if (!finite(ctx.robot_speed_mps) || ctx.robot_speed_mps <= 0.0)
    throw ValidationError("robot speed must be > 0");

  const auto& grid_var = ctx.kv.variance;
  const double mean_kv =
      grid_var.empty()
          ? 0.0
          : std::accumulate(grid_var.begin(), grid_var.end(), 0.0) /
                static_cast<double>(grid_var.size());
  std::erase_if(plan,
                [&](const Waypoint& wp) { return kv_at(ctx.kv, wp) < mean_kv; });

  double mean_leg = ctx.fallback_leg_m;
  if (!plan.empty()) mean_leg = route_length(plan, ctx.position) / plan.size();
  const double per_target =
      ctx.expected_measurement_s + mean_leg / ctx.robot_speed_mps;
  const long long n_min =
      per_target > 0.0
          ? static_cast<long long>(std::floor(ctx.remaining_time_s / per_target))
          : static_cast<long long>(plan.size());

  std::vector<Waypoint> pool(ctx.pool.begin(), ctx.pool.end());
  while (static_cast<long long>(plan.size()) < n_min && !pool.empty()) {
    const std::size_t pick = weighted_pick(pool, ctx.kv, rng);
    plan.push_back(pool[pick]);
    pool.erase(pool.begin() + pick);
  }
  return plan_tsp_route(plan, ctx.position);
}

RunLog run_mission(const MissionConfig& config, const RateField& truth) {
  config.validate();
  truth.validate();
  const GridSpec& spec = truth.spec;

  RunLog log;
  log.config = config;
  log.field_spec = spec;

  SplitMix64 plan_rng = SplitMix64::substream(config.seed, 1);
  std::uint64_t measurement_stream = 0;

  const std::vector<Waypoint> lattice =
      candidate_waypoints(spec, config.waypoint_spacing_m);
  std::vector<char> visited(lattice.size(), 0);

  Point pos{spec.origin_x, spec.origin_y};
  log.trajectory.push_back(pos);

  const double diagonal = std::hypot(spec.extent_x(), spec.extent_y());
  const VariogramModel bootstrap{0.0, 0.25 * diagonal, config.bootstrap_sill};
  VariogramModel model = bootstrap;
  bool model_fallback = true;
  double m_hat = config.min_planning_rate;

  KrigingMap map;
  map.spec = spec;
  map.estimate.assign(spec.size(), 0.0);
  map.variance.assign(spec.size(), covariance_from_variogram(bootstrap, 0.0));

  const double max_lag =
      config.max_lag_m > 0.0 ? config.max_lag_m : 0.5 * diagonal;
  const Point center{spec.origin_x + 0.5 * spec.extent_x(),
                     spec.origin_y + 0.5 * spec.extent_y()};

  double travel_time = 0.0;
  double measure_time = 0.0;
  double traveled = 0.0;
  std::vector<ObservationRecord> observations;

  auto unvisited_candidates = [&]() {
    std::vector<Waypoint> out;
    for (const Waypoint& wp : lattice)
      if (!visited[static_cast<std::size_t>(wp.id)]) out.push_back(wp);
    return out;
  };

  // Adaptive sampling seeds a reward-agnostic tour sized by what the budget
  // affords under worst-case dwell.
  std::vector<Waypoint> plan;
  if (config.strategy == Strategy::adaptive_sampling) {
    const double dwell = expected_measurement_duration(
        config.regime, 0.0, config.min_planning_rate);
    const double leg_s = config.waypoint_spacing_m / config.robot_speed_mps;
    long long n0 =
        static_cast<long long>(std::floor(config.horizon_s / (dwell + leg_s)));
    n0 = std::min<long long>(n0, static_cast<long long>(lattice.size()));
    std::vector<Waypoint> pool = lattice;
    std::vector<Waypoint> chosen;
    for (long long k = 0; k < n0 && !pool.empty(); ++k) {
      const std::size_t pick =
          std::min(static_cast<std::size_t>(plan_rng.uniform() * pool.size()),
                   pool.size() - 1);
      chosen.push_back(pool[pick]);
      pool.erase(pool.begin() + pick);
    }
    plan = plan_tsp_route(chosen, pos);
  }

  bool first_target = true;
  int record_index = 0;
  while (true) {
    const double remaining = config.horizon_s - (travel_time + measure_time);
    if (remaining <= 0.0) break;

    // --- select the next target -------------------------------------------
    std::optional<Waypoint> target;
    std::vector<Waypoint> resampled;  // keeps MC's fresh draw alive
    if (config.strategy == Strategy::adaptive_sampling) {
      if (plan.empty()) break;
      target = plan.front();
    } else if (first_target) {
      // start at the candidate closest to the field centre
      const auto open = unvisited_candidates();
      double best_d = -1.0;
      for (const Waypoint& wp : open) {
        const double d = std::hypot(wp.x - center.x, wp.y - center.y);
        if (best_d < 0.0 || d < best_d) {
          best_d = d;
          target = wp;
        }
      }
    } else if (config.strategy == Strategy::greedy) {
      target = select_greedy(map, unvisited_candidates(), pos);
    } else if (config.mc_resample_candidates) {
      resampled.reserve(lattice.size());
      for (std::size_t k = 0; k < lattice.size(); ++k)
        resampled.push_back({spec.origin_x + plan_rng.uniform() * spec.extent_x(),
                             spec.origin_y + plan_rng.uniform() * spec.extent_y(),
                             -1});
      target = select_monte_carlo(map, resampled, plan_rng);
    } else {
      target = select_monte_carlo(map, unvisited_candidates(), plan_rng);
    }
    if (!target) break;
    first_target = false;

    // --- travel, truncating the leg at the horizon -------------------------
    const double leg = std::hypot(target->x - pos.x, target->y - pos.y);
    const double leg_time = leg / config.robot_speed_mps;
    if (leg_time >= remaining && leg > 0.0) {
      const double frac = remaining / leg_time;
      pos.x += (target->x - pos.x) * frac;
      pos.y += (target->y - pos.y) * frac;
      travel_time += remaining;
      traveled += leg * frac;
      log.trajectory.push_back(pos);
      break;
    }
    pos = {target->x, target->y};
    travel_time += leg_time;
    traveled += leg;
    log.trajectory.push_back(pos);
    if (target->id >= 0 &&
        static_cast<std::size_t>(target->id) < visited.size())
      visited[static_cast<std::size_t>(target->id)] = 1;
    if (config.strategy == Strategy::adaptive_sampling && !plan.empty())
      plan.erase(plan.begin());

    // --- measure within the remaining tick budget --------------------------
    const double left = config.horizon_s - (travel_time + measure_time);
    const long long budget =
        static_cast<long long>(std::floor(left / kTickSeconds + 1e-9));
    if (budget < 1) break;
    SplitMix64 meas_rng =
        SplitMix64::substream(config.seed, 2 + 2 * measurement_stream);
    ++measurement_stream;
    const Measurement meas = simulate_measurement(
        truth, pos.x, pos.y, config.regime, meas_rng, config.env, budget);
    measure_time += meas.duration;
    observations.push_back({pos.x, pos.y, meas.duration, meas.corrected_counts});

    // --- refresh model and map ---------------------------------------------
    m_hat = std::max(weighted_mean_rate(observations), 1e-12);
    bool fitted = false;
    if (static_cast<int>(observations.size()) >= config.min_fit_measurements) {
      const auto merged = merge_duplicate_locations(observations);
      if (merged.size() >= 2) {
        try {
          const EmpiricalVariogram emp =
              empirical_variogram(merged, config.bin_width_m, max_lag);
          VariogramFitConfig fc;
          fc.fallback = bootstrap;
          fc.loss_scale = config.loss_scale;
          double mean_rate = 0.0, var_rate = 0.0;
          for (const auto& o : merged) mean_rate += o.rate();
          mean_rate /= static_cast<double>(merged.size());
          for (const auto& o : merged) {
            const double d = o.rate() - mean_rate;
            var_rate += d * d;
          }
          var_rate /= static_cast<double>(merged.size());
          fc.initial_sill = var_rate > 0.0 ? var_rate : -1.0;
          const VariogramFit fit = fit_gaussian_model(emp, fc);
          model = fit.model;
          model_fallback = fit.fallback_used;
          fitted = true;
        } catch (const ValidationError&) {
          // all pairs out of lag range: stay on the bootstrap prior
        }
      }
    }
    if (!fitted) {
      model = bootstrap;
      model_fallback = true;
    }
    map = krige_grid(observations, model, m_hat, spec, KrigingMethod::poisson,
                     config.kv_convention);

    MeasurementRecord rec;
    rec.index = ++record_index;
    rec.target = *target;
    rec.leg_distance_m = leg;
    rec.measurement = meas;
    rec.variogram = model;
    rec.variogram_fallback = model_fallback;
    rec.m_hat = m_hat;
    rec.mse = map_mse(map, truth);
    rec.elapsed_s = travel_time + measure_time;
    rec.traveled_m = traveled;
    log.records.push_back(rec);

    // --- adaptive sampling: maintain the plan ------------------------------
    if (config.strategy == Strategy::adaptive_sampling) {
      std::vector<Waypoint> pool;
      for (const Waypoint& wp : lattice) {
        if (visited[static_cast<std::size_t>(wp.id)]) continue;
        bool planned = false;
        for (const Waypoint& p : plan)
          if (p.id == wp.id) {
            planned = true;
            break;
          }
        if (!planned) pool.push_back(wp);
      }
      const double dwell = expected_measurement_duration(
          config.regime, m_hat, config.min_planning_rate);
      ReplanContext ctx{map,
                        pool,
                        pos,
                        config.horizon_s - (travel_time + measure_time),
                        dwell,
                        config.robot_speed_mps,
                        config.waypoint_spacing_m};
      plan = adaptive_replan(std::move(plan), ctx, plan_rng);
    }
  }

  log.total_time_s = travel_time + measure_time;
  log.total_distance_m = traveled;
  log.final_variogram = model;
  log.final_m_hat = m_hat;
  log.final_map = std::move(map);
  log.final_mse =
      log.records.empty() ? map_mse(log.final_map, truth) : log.records.back().mse;
  return log;
}

}  // namespace pkx
