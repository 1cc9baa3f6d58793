#include <doctest.h>

#include <cmath>
#include <vector>

#include "pkx/errors.hpp"
#include "pkx/evaluation.hpp"

using namespace pkx;

namespace {

RunLog curve_log(std::vector<CurvePoint> pts) {
  RunLog log;
  for (const CurvePoint& p : pts) {
    MeasurementRecord rec;
    rec.index = static_cast<int>(log.records.size()) + 1;
    rec.elapsed_s = p.time_s;
    rec.traveled_m = p.distance_m;
    rec.mse = p.mse;
    log.records.push_back(rec);
  }
  if (!pts.empty()) log.final_mse = pts.back().mse;
  return log;
}

ComparisonMatrix small_matrix() {
  ComparisonMatrix m;
  m.fields.emplace_back("step",
                        make_step_field(GridSpec{0, 0, 20, 5, 5}, 50, 2.5, 5.0));
  m.strategies = {Strategy::greedy, Strategy::monte_carlo};
  m.regimes = {SamplingRegime::fmi(60)};
  m.seeds = {1, 2};
  m.base.horizon_s = 600.0;
  m.base.waypoint_spacing_m = 20.0;
  m.time_step_s = 60.0;
  m.distance_step_m = 10.0;
  return m;
}

}  // namespace

TEST_CASE("mean squared error of rasters") {
  GridSpec spec{0, 0, 1, 2, 1};
  std::vector<double> a{1, 2}, b{2, 4};
  CHECK(mse(spec, a, spec, b) == 2.5);

  GridSpec other{0, 0, 2, 2, 1};
  CHECK_THROWS_AS(mse(spec, a, other, b), ValidationError);
  std::vector<double> short_raster{1};
  CHECK_THROWS_AS(mse(spec, a, spec, short_raster), ValidationError);
}

TEST_CASE("run curves mirror the record snapshots") {
  RunLog log = curve_log({{50, 5, 10}, {110, 12, 6}});
  auto curve = run_curve(log);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].time_s == 50.0);
  CHECK(curve[1].distance_m == 12.0);
  CHECK(curve[1].mse == 6.0);
}

TEST_CASE("aggregation on a shared time grid with carry-forward") {
  std::vector<RunLog> logs;
  logs.push_back(curve_log({{50, 5, 10}, {110, 12, 6}}));
  logs.push_back(curve_log({{70, 8, 20}, {130, 15, 12}}));

  SUBCASE("by time") {
    AggregateCurve c = aggregate_runs(logs, Abscissa::time, 60.0);
    // first shared grid point is 120 (the latest first snapshot is t=70)
    REQUIRE(c.grid.size() == 2);
    CHECK(c.grid[0] == 120.0);
    CHECK(c.grid[1] == 180.0);
    CHECK(c.mean[0] == 13.0);   // {6, 20}
    CHECK(c.stdev[0] == 7.0);   // population
    CHECK(c.mean[1] == 9.0);    // {6, 12}
    CHECK(c.stdev[1] == 3.0);
    CHECK(c.runs == 2);
    // the 60-second point precedes run 2's first snapshot and is dropped
    CHECK(c.warning.find("dropped 1") != std::string::npos);
  }
  SUBCASE("by distance") {
    AggregateCurve c = aggregate_runs(logs, Abscissa::distance, 10.0);
    REQUIRE(c.grid.size() == 2);
    CHECK(c.grid[0] == 10.0);
    CHECK(c.grid[1] == 20.0);
    CHECK(c.mean[0] == 15.0);  // {10, 20}
    CHECK(c.stdev[0] == 5.0);
    CHECK(c.mean[1] == 9.0);   // {6, 12}
    CHECK(c.stdev[1] == 3.0);
  }
}

TEST_CASE("a single run aggregates to its own carried-forward curve") {
  std::vector<RunLog> logs{curve_log({{30, 3, 9}, {90, 10, 4}})};
  AggregateCurve c = aggregate_runs(logs, Abscissa::time, 30.0);
  REQUIRE(c.grid.size() == 3);  // 30, 60, 90
  CHECK(c.grid[0] == 30.0);
  CHECK(c.mean[0] == 9.0);
  CHECK(c.mean[1] == 9.0);
  CHECK(c.mean[2] == 4.0);
  for (double s : c.stdev) CHECK(s == 0.0);
  CHECK(c.warning.empty());
}

TEST_CASE("aggregation input validation") {
  CHECK_THROWS_AS(aggregate_runs({}, Abscissa::time, 60.0), ValidationError);
  std::vector<RunLog> logs{curve_log({{30, 3, 9}})};
  CHECK_THROWS_AS(aggregate_runs(logs, Abscissa::time, 0.0), ValidationError);
  logs.push_back(curve_log({}));
  CHECK_THROWS_AS(aggregate_runs(logs, Abscissa::time, 60.0), ValidationError);
}

TEST_CASE("strategy and regime naming round-trips") {
  CHECK(strategy_name(Strategy::greedy) == "greedy");
  CHECK(strategy_from_name("monte_carlo") == Strategy::monte_carlo);
  CHECK(strategy_from_name(strategy_name(Strategy::adaptive_sampling)) ==
        Strategy::adaptive_sampling);
  CHECK_THROWS_AS(strategy_from_name("bogus"), ValidationError);
  CHECK(regime_label(SamplingRegime::ami(0.025)) == "ami2.5pct");
  CHECK(regime_label(SamplingRegime::fmi(600)) == "fmi600");
}

TEST_CASE("condition comparison over a small matrix") {
  const ComparisonMatrix matrix = small_matrix();
  ComparisonReport report = compare_conditions(matrix);

  REQUIRE(report.cells.size() == 2);
  CHECK(report.cells[0].label == "step/greedy/fmi60");
  CHECK(report.cells[1].label == "step/monte_carlo/fmi60");
  REQUIRE(report.differences.size() == 1);
  CHECK(report.differences[0].a == "step/greedy/fmi60");
  CHECK(report.stdev_convention == "population");

  for (const ComparisonCell& cell : report.cells) {
    CHECK(cell.error.empty());
    CHECK(cell.final_mses.size() == 2);
    CHECK(cell.by_time.runs == 2);
    CHECK(!cell.by_time.grid.empty());
    CHECK(!cell.by_distance.grid.empty());
    CHECK(cell.mean_measurements > 0.0);
    CHECK(cell.mean_total_time_s <= matrix.base.horizon_s + 1e-9);
  }
  CHECK(report.differences[0].final_mean_mse_delta ==
        report.cells[0].final_mean_mse - report.cells[1].final_mean_mse);
}

TEST_CASE("comparison results do not depend on the worker count") {
  ComparisonMatrix matrix = small_matrix();
  ComparisonReport serial = compare_conditions(matrix);
  matrix.jobs = 3;
  ComparisonReport threaded = compare_conditions(matrix);

  REQUIRE(serial.cells.size() == threaded.cells.size());
  for (std::size_t i = 0; i < serial.cells.size(); ++i) {
    CHECK(serial.cells[i].label == threaded.cells[i].label);
    CHECK(serial.cells[i].final_mean_mse == threaded.cells[i].final_mean_mse);
    CHECK(serial.cells[i].final_std_mse == threaded.cells[i].final_std_mse);
    REQUIRE(serial.cells[i].by_time.mean.size() ==
            threaded.cells[i].by_time.mean.size());
    for (std::size_t k = 0; k < serial.cells[i].by_time.mean.size(); ++k)
      CHECK(serial.cells[i].by_time.mean[k] == threaded.cells[i].by_time.mean[k]);
  }
}

TEST_CASE("a failing cell is contained and reported") {
  ComparisonMatrix matrix = small_matrix();
  SamplingRegime bad;  // constructed directly: an invalid 65 s fixed dwell
  bad.kind = SamplingRegime::Kind::fmi;
  bad.fmi_duration_s = 65.0;
  matrix.regimes.push_back(bad);

  ComparisonReport report = compare_conditions(matrix);
  REQUIRE(report.cells.size() == 4);
  int failed = 0, fine = 0;
  for (const ComparisonCell& cell : report.cells) {
    if (cell.error.empty()) {
      ++fine;
      CHECK(cell.final_mses.size() == 2);
    } else {
      ++failed;
      CHECK(cell.error.find("seed 1") != std::string::npos);
      CHECK(cell.final_mses.empty());
    }
  }
  CHECK(fine == 2);
  CHECK(failed == 2);
  // differences only pair healthy cells
  CHECK(report.differences.size() == 1);
}

TEST_CASE("comparison matrix validation") {
  ComparisonMatrix matrix = small_matrix();
  matrix.strategies.clear();
  CHECK_THROWS_AS(compare_conditions(matrix), ValidationError);
  matrix = small_matrix();
  matrix.seeds.clear();
  CHECK_THROWS_AS(compare_conditions(matrix), ValidationError);
  matrix = small_matrix();
  matrix.time_step_s = 0;
  CHECK_THROWS_AS(compare_conditions(matrix), ValidationError);
}
