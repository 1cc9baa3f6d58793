#pragma once

#include <span>
#include <vector>

#include "pkx/field.hpp"
#include "pkx/variography.hpp"

namespace pkx {

enum class KrigingMethod { ordinary, poisson };

// Which prediction variance the solvers report. `full_ok` is the minimized
// estimation variance C(0) - sum_i(w_i C_i0) - mu: zero where data pins the
// field, rising toward the sill far from any observation. It is the form
// every exploration reward here relies on. `weighted_covariance` reports the
// bare data-proximity term sum_i(w_i C_i0) instead (the complement, without
// the Lagrange part); it is kept selectable for comparison runs.
enum class VarianceConvention { full_ok, weighted_covariance };

struct KrigingWeights {
  std::vector<double> weights;  // sums to 1 (unbiasedness constraint)
  double lagrange = 0.0;
};

struct PointPrediction {
  double estimate = 0.0;  // counts/s, clamped at 0
  double variance = 0.0;  // (counts/s)^2, clamped at 0
  KrigingWeights weights;
};

// Estimate and variance rasters from a single factorization of the kriging
// system (the matrix depends only on the data, so one LU serves every node).
struct KrigingMap {
  GridSpec spec;
  std::vector<double> estimate;
  std::vector<double> variance;
  int clamped_estimates = 0;  // nodes whose raw estimate was negative

  double estimate_at(double x, double y) const {
    return bilinear_at(spec, estimate, x, y);
  }
  double variance_at(double x, double y) const {
    return bilinear_at(spec, variance, x, y);
  }
};

// C(h) = sill - gamma(h); C(0) = sill - nugget.
double covariance_from_variogram(const VariogramModel& model, double h);

// Count-aware kriging of the underlying rate. The system is the ordinary
// one plus m_hat / t_i added to the i-th diagonal entry, which discounts
// short-dwell (noisy) observations; m_hat is the duration-weighted mean rate
// and must be > 0. Requires >= 1 observation (the single-observation system
// is solved in closed form: w = 1, mu = C_10 - C(0) - m_hat/t_1).
PointPrediction solve_poisson_kriging(std::span<const ObservationRecord> obs,
                                      const VariogramModel& model,
                                      double m_hat, double x0, double y0,
                                      VarianceConvention vc =
                                          VarianceConvention::full_ok);

// Classical ordinary kriging of point rates (no counting-noise diagonal).
// Requires >= 2 observations.
PointPrediction solve_ordinary_kriging(std::span<const ObservationRecord> obs,
                                       const VariogramModel& model, double x0,
                                       double y0,
                                       VarianceConvention vc =
                                           VarianceConvention::full_ok);

// Full-grid prediction sharing one factorization. Per-node output is
// bit-identical to the corresponding point solver. `m_hat` is ignored for
// the ordinary method.
KrigingMap krige_grid(std::span<const ObservationRecord> obs,
                      const VariogramModel& model, double m_hat,
                      const GridSpec& spec, KrigingMethod method,
                      VarianceConvention vc = VarianceConvention::full_ok);

}  // namespace pkx
