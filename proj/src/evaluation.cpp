#include "pkx/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "pkx/errors.hpp"
#include "pkx/io.hpp"

namespace pkx {

namespace {

double curve_abscissa(const CurvePoint& pt, Abscissa a) {
  return a == Abscissa::time ? pt.time_s : pt.distance_m;
}

// Last observation carried forward; callers guarantee at least one point at
// or before `where`.
double locf(const std::vector<CurvePoint>& curve, Abscissa a, double where) {
  const double tol = 1e-9 * std::max(1.0, std::fabs(where));
  double value = curve.front().mse;
  for (const CurvePoint& pt : curve) {
    if (curve_abscissa(pt, a) <= where + tol)
      value = pt.mse;
    else
      break;
  }
  return value;
}

}  // namespace

double mse(const GridSpec& spec_a, std::span<const double> a,
           const GridSpec& spec_b, std::span<const double> b) {
  if (!(spec_a == spec_b))
    throw ValidationError("rasters are not co-registered");
  if (a.size() != spec_a.size() || b.size() != spec_b.size())
    throw ValidationError("raster size does not match grid");
  if (a.empty()) throw ValidationError("cannot compare empty rasters");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double mse(const RateField& a, const RateField& b) {
  return mse(a.spec, a.rates, b.spec, b.rates);
}

double map_mse(const KrigingMap& map, const RateField& truth) {
  return mse(map.spec, map.estimate, truth.spec, truth.rates);
}

std::vector<CurvePoint> run_curve(const RunLog& log) {
  std::vector<CurvePoint> out;
  out.reserve(log.records.size());
  for (const MeasurementRecord& rec : log.records)
    out.push_back({rec.elapsed_s, rec.traveled_m, rec.mse});
  return out;
}

AggregateCurve aggregate_runs(std::span<const RunLog> logs, Abscissa abscissa,
                              double grid_step) {
  if (logs.empty()) throw ValidationError("no runs to aggregate");
  if (!(grid_step > 0.0) || !std::isfinite(grid_step))
    throw ValidationError("grid step must be > 0");

  std::vector<std::vector<CurvePoint>> curves;
  curves.reserve(logs.size());
  double max_first = 0.0;
  double max_last = 0.0;
  for (const RunLog& log : logs) {
    auto curve = run_curve(log);
    if (curve.empty())
      throw ValidationError("cannot aggregate a run with no measurements");
    max_first = std::max(max_first, curve_abscissa(curve.front(), abscissa));
    max_last = std::max(max_last, curve_abscissa(curve.back(), abscissa));
    curves.push_back(std::move(curve));
  }

  const long long k0 =
      static_cast<long long>(std::ceil(max_first / grid_step - 1e-12));
  long long kn =
      static_cast<long long>(std::ceil(max_last / grid_step - 1e-12));
  if (kn < k0) kn = k0;

  AggregateCurve out;
  out.abscissa = abscissa;
  out.grid_step = grid_step;
  out.runs = static_cast<int>(logs.size());
  // The shared grid naturally starts one step in; warn only when later grid
  // points had to go because some run's first snapshot arrived after them.
  if (k0 > 1)
    out.warning = "dropped " + std::to_string(k0 - 1) +
                  " leading grid point(s) not covered by every run";

  for (long long k = k0; k <= kn; ++k) {
    const double where = static_cast<double>(k) * grid_step;
    double mean = 0.0;
    std::vector<double> vals;
    vals.reserve(curves.size());
    for (const auto& curve : curves) {
      vals.push_back(locf(curve, abscissa, where));
      mean += vals.back();
    }
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) {
      const double d = v - mean;
      var += d * d;
    }
    var /= static_cast<double>(vals.size());  // population convention
    out.grid.push_back(where);
    out.mean.push_back(mean);
    out.stdev.push_back(std::sqrt(var));
  }
  return out;
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::greedy: return "greedy";
    case Strategy::monte_carlo: return "monte_carlo";
    case Strategy::adaptive_sampling: return "adaptive_sampling";
  }
  throw ValidationError("unknown strategy");
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "greedy") return Strategy::greedy;
  if (name == "monte_carlo") return Strategy::monte_carlo;
  if (name == "adaptive_sampling") return Strategy::adaptive_sampling;
  throw ValidationError("unknown strategy \"" + name +
                        "\" (greedy, monte_carlo, adaptive_sampling)");
}

std::string regime_label(const SamplingRegime& regime) {
  if (regime.kind == SamplingRegime::Kind::fmi)
    return "fmi" + format_double(regime.fmi_duration_s);
  return "ami" + format_double(regime.ami_threshold * 100.0) + "pct";
}

ComparisonReport compare_conditions(const ComparisonMatrix& matrix) {
  if (matrix.fields.empty()) throw ValidationError("comparison needs fields");
  if (matrix.strategies.empty())
    throw ValidationError("comparison needs strategies");
  if (matrix.regimes.empty()) throw ValidationError("comparison needs regimes");
  if (matrix.seeds.empty()) throw ValidationError("comparison needs seeds");
  if (!(matrix.time_step_s > 0.0) || !(matrix.distance_step_m > 0.0))
    throw ValidationError("aggregation steps must be > 0");

  struct Slot {
    const RateField* field = nullptr;
    MissionConfig config;
    std::size_t cell = 0;
  };
  std::vector<Slot> slots;
  std::vector<ComparisonCell> cells;
  for (const auto& [fname, field] : matrix.fields) {
    for (Strategy s : matrix.strategies) {
      for (const SamplingRegime& r : matrix.regimes) {
        ComparisonCell cell;
        cell.field = fname;
        cell.strategy = strategy_name(s);
        cell.regime = regime_label(r);
        cell.label = cell.field + "/" + cell.strategy + "/" + cell.regime;
        const std::size_t cell_idx = cells.size();
        cells.push_back(std::move(cell));
        for (std::uint64_t seed : matrix.seeds) {
          Slot slot;
          slot.field = &field;
          slot.config = matrix.base;
          slot.config.strategy = s;
          slot.config.regime = r;
          slot.config.seed = seed;
          slot.cell = cell_idx;
          slots.push_back(std::move(slot));
        }
      }
    }
  }

  // Slot-addressed results keep the report independent of scheduling.
  std::vector<RunLog> logs(slots.size());
  std::vector<char> ok(slots.size(), 0);
  std::vector<std::string> errors(slots.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= slots.size()) return;
      try {
        logs[i] = run_mission(slots[i].config, *slots[i].field);
        ok[i] = 1;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int jobs = std::max(1, matrix.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  const std::size_t per_cell = matrix.seeds.size();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    ComparisonCell& cell = cells[c];
    std::vector<RunLog> cell_logs;
    for (std::size_t k = 0; k < per_cell; ++k) {
      const std::size_t i = c * per_cell + k;
      if (ok[i]) {
        cell_logs.push_back(std::move(logs[i]));
      } else if (cell.error.empty()) {
        cell.error = "seed " + std::to_string(matrix.seeds[k]) + ": " + errors[i];
      }
    }
    if (cell_logs.empty()) continue;
    bool aggregable = true;
    for (const RunLog& log : cell_logs)
      if (log.records.empty()) aggregable = false;
    if (aggregable) {
      cell.by_time = aggregate_runs(cell_logs, Abscissa::time, matrix.time_step_s);
      cell.by_distance =
          aggregate_runs(cell_logs, Abscissa::distance, matrix.distance_step_m);
    } else if (cell.error.empty()) {
      cell.error = "a run produced no measurements; curves omitted";
    }
    for (const RunLog& log : cell_logs) {
      cell.final_mses.push_back(log.final_mse);
      cell.total_distances.push_back(log.total_distance_m);
      cell.total_times.push_back(log.total_time_s);
      cell.measurement_counts.push_back(
          static_cast<long long>(log.records.size()));
    }
    const double n = static_cast<double>(cell.final_mses.size());
    for (double v : cell.final_mses) cell.final_mean_mse += v / n;
    double var = 0.0;
    for (double v : cell.final_mses) {
      const double d = v - cell.final_mean_mse;
      var += d * d / n;
    }
    cell.final_std_mse = std::sqrt(var);
    for (double v : cell.total_distances) cell.mean_total_distance_m += v / n;
    for (double v : cell.total_times) cell.mean_total_time_s += v / n;
    for (long long v : cell.measurement_counts)
      cell.mean_measurements += static_cast<double>(v) / n;
  }

  ComparisonReport report;
  report.seeds = matrix.seeds;
  report.time_step_s = matrix.time_step_s;
  report.distance_step_m = matrix.distance_step_m;
  for (std::size_t a = 0; a < cells.size(); ++a) {
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      if (!cells[a].error.empty() || !cells[b].error.empty()) continue;
      CellDifference diff;
      diff.a = cells[a].label;
      diff.b = cells[b].label;
      diff.final_mean_mse_delta = cells[a].final_mean_mse - cells[b].final_mean_mse;
      diff.mean_total_distance_delta =
          cells[a].mean_total_distance_m - cells[b].mean_total_distance_m;
      report.differences.push_back(std::move(diff));
    }
  }
  report.cells = std::move(cells);
  return report;
}

}  // namespace pkx
