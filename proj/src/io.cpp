#include "pkx/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "pkx/commands.hpp"
#include "pkx/errors.hpp"
#include "pkx/runconfig.hpp"

namespace pkx {

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path + ": cannot open for writing");
  out << body;
  if (!out) throw ValidationError(path + ": write failed");
}

json measurement_record_to_json(const MeasurementRecord& rec) {
  const Measurement& m = rec.measurement;
  json v = variogram_to_json(rec.variogram);
  v["fallback"] = rec.variogram_fallback;
  return json{{"type", "measurement"},
              {"index", rec.index},
              {"target", json{{"x", rec.target.x},
                              {"y", rec.target.y},
                              {"id", rec.target.id}}},
              {"leg_distance_m", rec.leg_distance_m},
              {"x", m.x},
              {"y", m.y},
              {"ticks", m.ticks},
              {"raw_counts", m.raw_counts},
              {"corrected_counts", m.corrected_counts},
              {"duration_s", m.duration},
              {"rate", m.rate},
              {"sigma", m.sigma},
              {"sigma_rel", m.sigma_rel},
              {"sigma_valid", m.sigma_valid},
              {"variogram", std::move(v)},
              {"m_hat", rec.m_hat},
              {"mse", rec.mse},
              {"elapsed_s", rec.elapsed_s},
              {"traveled_m", rec.traveled_m}};
}

json curve_to_json(const AggregateCurve& curve) {
  return json{{"abscissa", curve.abscissa == Abscissa::time ? "time_s"
                                                            : "distance_m"},
              {"grid_step", curve.grid_step},
              {"grid", curve.grid},
              {"mean_mse", curve.mean},
              {"stdev_mse", curve.stdev},
              {"runs", curve.runs},
              {"warning", curve.warning}};
}

std::string sanitize_label(std::string label) {
  for (char& c : label)
    if (c == '/' || c == ' ') c = '_';
  return label;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  // Shortest exact representation: scan every precision because %g flips
  // between fixed and scientific notation (60 prints as "6e+01" at precision
  // 1 but "60" at precision 2, and both parse back exactly).
  char buf[40];
  std::string best;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v &&
        (best.empty() || std::strlen(buf) < best.size()))
      best = buf;
  }
  return best;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string serialize_run_log(const RunLog& log) {
  std::string out;
  const json header{{"type", "header"},
                    {"tool", kToolName},
                    {"version", kToolVersion},
                    {"field", grid_spec_to_json(log.field_spec)},
                    {"config", mission_to_json(log.config)}};
  out += header.dump();
  out += '\n';
  for (const MeasurementRecord& rec : log.records) {
    out += measurement_record_to_json(rec).dump();
    out += '\n';
  }
  const json footer{{"type", "footer"},
                    {"measurement_count", log.records.size()},
                    {"total_time_s", log.total_time_s},
                    {"total_distance_m", log.total_distance_m},
                    {"final_mse", log.final_mse},
                    {"final_m_hat", log.final_m_hat},
                    {"final_variogram", variogram_to_json(log.final_variogram)}};
  out += footer.dump();
  out += '\n';
  return out;
}

void save_run_log(const RunLog& log, const std::string& path) {
  write_text(path, serialize_run_log(log));
}

void save_trajectory_csv(const RunLog& log, const std::string& path) {
  std::string body = "x,y\n";
  for (const Point& p : log.trajectory) {
    body += format_double(p.x);
    body += ',';
    body += format_double(p.y);
    body += '\n';
  }
  write_text(path, body);
}

void save_kriging_map(const KrigingMap& map, KrigingMethod method,
                      const VariogramModel& model, double m_hat,
                      std::size_t observation_count, const std::string& dir,
                      const std::string& stem) {
  RateField estimate{map.spec, map.estimate};
  RateField variance{map.spec, map.variance};
  const std::string estimate_file = stem + "_estimate.grid";
  const std::string variance_file = stem + "_variance.grid";
  save_rate_field(estimate, dir + "/" + estimate_file);
  save_rate_field(variance, dir + "/" + variance_file);
  const json meta{
      {"method", method == KrigingMethod::poisson ? "poisson" : "ordinary"},
      {"variogram", variogram_to_json(model)},
      {"m_hat", m_hat},
      {"observation_count", observation_count},
      {"clamped_estimates", map.clamped_estimates},
      {"estimate_file", estimate_file},
      {"variance_file", variance_file},
      {"grid", grid_spec_to_json(map.spec)}};
  write_text(dir + "/" + stem + ".json", meta.dump(2) + "\n");
}

void export_variogram_csv(const EmpiricalVariogram& emp,
                          const VariogramModel& fit, const std::string& path) {
  std::string body = "h,gamma_hat,n_h,gamma_fit\n";
  for (std::size_t k = 0; k < emp.bins(); ++k) {
    body += format_double(emp.lag[k]);
    body += ',';
    body += format_double(emp.gamma[k]);
    body += ',';
    body += format_double(emp.weight[k]);
    body += ',';
    body += format_double(model_gamma(fit, emp.lag[k]));
    body += '\n';
  }
  write_text(path, body);
}

void save_aggregate_curve_csv(const AggregateCurve& curve,
                              const std::string& path) {
  std::string body =
      curve.abscissa == Abscissa::time ? "time_s" : "distance_m";
  body += ",mean_mse,stdev_mse\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    body += format_double(curve.grid[i]);
    body += ',';
    body += format_double(curve.mean[i]);
    body += ',';
    body += format_double(curve.stdev[i]);
    body += '\n';
  }
  write_text(path, body);
}

void save_comparison_report(const ComparisonReport& report,
                            const std::string& dir) {
  json cells = json::array();
  for (const ComparisonCell& cell : report.cells) {
    cells.push_back(json{{"field", cell.field},
                         {"strategy", cell.strategy},
                         {"regime", cell.regime},
                         {"label", cell.label},
                         {"final_mean_mse", cell.final_mean_mse},
                         {"final_std_mse", cell.final_std_mse},
                         {"mean_total_time_s", cell.mean_total_time_s},
                         {"mean_total_distance_m", cell.mean_total_distance_m},
                         {"mean_measurements", cell.mean_measurements},
                         {"final_mses", cell.final_mses},
                         {"total_distances", cell.total_distances},
                         {"total_times", cell.total_times},
                         {"measurement_counts", cell.measurement_counts},
                         {"by_time", curve_to_json(cell.by_time)},
                         {"by_distance", curve_to_json(cell.by_distance)},
                         {"error", cell.error}});
  }
  json diffs = json::array();
  for (const CellDifference& d : report.differences)
    diffs.push_back(json{{"a", d.a},
                         {"b", d.b},
                         {"final_mean_mse_delta", d.final_mean_mse_delta},
                         {"mean_total_distance_delta",
                          d.mean_total_distance_delta}});
  const json body{{"tool", kToolName},
                  {"version", kToolVersion},
                  {"seeds", report.seeds},
                  {"time_step_s", report.time_step_s},
                  {"distance_step_m", report.distance_step_m},
                  {"stdev_convention", report.stdev_convention},
                  {"cells", std::move(cells)},
                  {"differences", std::move(diffs)}};
  write_text(dir + "/report.json", body.dump(2) + "\n");

  for (const ComparisonCell& cell : report.cells) {
    if (!cell.error.empty()) continue;
    const std::string stem = dir + "/curve_" + sanitize_label(cell.label);
    save_aggregate_curve_csv(cell.by_time, stem + "_time.csv");
    save_aggregate_curve_csv(cell.by_distance, stem + "_distance.csv");
  }
}

}  // namespace pkx
