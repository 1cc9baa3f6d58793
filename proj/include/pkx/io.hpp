#pragma once

#include <string>

#include "pkx/evaluation.hpp"
#include "pkx/exploration.hpp"
#include "pkx/kriging.hpp"
#include "pkx/variography.hpp"

namespace pkx {

// Shortest round-trip decimal form ("%.17g" trimmed by value); parsing it
// back yields the identical double, and equal doubles always render to equal
// bytes, which is what keeps artifacts byte-reproducible.
std::string format_double(double v);

// 16-hex-digit FNV-1a over a string (used to fingerprint configs).
std::string fnv1a_hex(const std::string& bytes);

// JSON-lines serialization of a run: one header object, one object per
// measurement, one footer object.
std::string serialize_run_log(const RunLog& log);
void save_run_log(const RunLog& log, const std::string& path);

void save_trajectory_csv(const RunLog& log, const std::string& path);

// Estimate + variance rasters plus a JSON sidecar describing how they were
// produced.
void save_kriging_map(const KrigingMap& map, KrigingMethod method,
                      const VariogramModel& model, double m_hat,
                      std::size_t observation_count, const std::string& dir,
                      const std::string& stem);

// Columns: h, gamma_hat, n_h, gamma_fit.
void export_variogram_csv(const EmpiricalVariogram& emp,
                          const VariogramModel& fit, const std::string& path);

void save_aggregate_curve_csv(const AggregateCurve& curve,
                              const std::string& path);

void save_comparison_report(const ComparisonReport& report,
                            const std::string& dir);

}  // namespace pkx
