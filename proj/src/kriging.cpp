#include "pkx/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "pkx/errors.hpp"

namespace pkx {

namespace {

bool finite(double v) { return std::isfinite(v); }

// Row-major LU with partial pivoting. Returns false when a pivot falls below
// the relative floor, i.e. the system is numerically singular.
bool lu_factor(std::vector<double>& a, int m, std::vector<int>& piv) {
  piv.assign(m, 0);
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) scale = 1.0;
  for (int k = 0; k < m; ++k) {
    int p = k;
    double best = std::fabs(a[k * m + k]);
    for (int i = k + 1; i < m; ++i) {
      const double mag = std::fabs(a[i * m + k]);
      if (mag > best) {
        best = mag;
        p = i;
      }
    }
    if (!(best > scale * 1e-13)) return false;
    piv[k] = p;
    if (p != k)
      for (int j = 0; j < m; ++j) std::swap(a[k * m + j], a[p * m + j]);
    const double d = a[k * m + k];
    for (int i = k + 1; i < m; ++i) {
      const double f = (a[i * m + k] /= d);
      if (f == 0.0) continue;
      for (int j = k + 1; j < m; ++j) a[i * m + j] -= f * a[k * m + j];
    }
  }
  return true;
}

void lu_solve(const std::vector<double>& a, int m, const std::vector<int>& piv,
              std::vector<double>& b) {
  for (int k = 0; k < m; ++k)
    if (piv[k] != k) std::swap(b[k], b[piv[k]]);
  for (int i = 1; i < m; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= a[i * m + j] * b[j];
    b[i] = s;
  }
  for (int i = m - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < m; ++j) s -= a[i * m + j] * b[j];
    b[i] = s / a[i * m + i];
  }
}

// Data-side kriging matrix: covariances bordered by the unbiasedness row and
// column; the count-noise form adds m_hat / t_i to the i-th diagonal entry.
std::vector<double> kriging_matrix(std::span<const ObservationRecord> obs,
                                   const VariogramModel& model, bool poisson,
                                   double m_hat, double jitter) {
  const int n = static_cast<int>(obs.size());
  const int m = n + 1;
  std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double h =
          std::hypot(obs[i].x - obs[j].x, obs[i].y - obs[j].y);
      a[i * m + j] = covariance_from_variogram(model, h);
    }
    if (poisson) a[i * m + i] += m_hat / obs[i].duration;
    a[i * m + i] += jitter;
    a[i * m + n] = 1.0;
    a[n * m + i] = 1.0;
  }
  return a;
}

struct FactoredSystem {
  int n = 0;
  bool poisson = false;
  double m_hat = 0.0;
  std::vector<double> lu;
  std::vector<int> piv;
};

FactoredSystem factor_system(std::span<const ObservationRecord> obs,
                             const VariogramModel& model, bool poisson,
                             double m_hat) {
  FactoredSystem sys;
  sys.n = static_cast<int>(obs.size());
  sys.poisson = poisson;
  sys.m_hat = m_hat;
  const int m = sys.n + 1;
  sys.lu = kriging_matrix(obs, model, poisson, m_hat, 0.0);
  if (lu_factor(sys.lu, m, sys.piv)) return sys;
  // Duplicate or nearly co-located observations make the covariance block
  // rank-deficient; retry with a diagonal jitter escalated relative to the
  // matrix magnitude until the factorization goes through.
  const double scale = std::max(covariance_from_variogram(model, 0.0), 1e-30);
  for (double rel : {1e-12, 1e-9, 1e-6, 1e-3}) {
    sys.lu = kriging_matrix(obs, model, poisson, m_hat, rel * scale);
    if (lu_factor(sys.lu, m, sys.piv)) return sys;
  }
  throw SolveError("kriging system is singular (co-located observations?)");
}

struct RawPrediction {
  double estimate = 0.0;  // before the zero clamp
  double variance = 0.0;  // before the zero clamp
  KrigingWeights weights;
};

RawPrediction predict_raw(std::span<const ObservationRecord> obs,
                          const VariogramModel& model,
                          const FactoredSystem& sys, double x0, double y0,
                          VarianceConvention vc) {
  const int n = sys.n;
  const int m = n + 1;
  RawPrediction out;

  std::vector<double> cov(n);
  for (int i = 0; i < n; ++i)
    cov[i] = covariance_from_variogram(
        model, std::hypot(obs[i].x - x0, obs[i].y - y0));

  if (sys.poisson && n == 1) {
    // Closed form keeps the single-observation estimate bit-exact.
    out.weights.weights = {1.0};
    out.weights.lagrange = cov[0] - covariance_from_variogram(model, 0.0) -
                           sys.m_hat / obs[0].duration;
    out.estimate = obs[0].rate();
  } else {
    std::vector<double> b(m, 0.0);
    for (int i = 0; i < n; ++i) b[i] = cov[i];
    b[n] = 1.0;
    lu_solve(sys.lu, m, sys.piv, b);
    out.weights.lagrange = b[n];
    b.resize(n);
    out.weights.weights = std::move(b);
    double est = 0.0;
    for (int i = 0; i < n; ++i)
      est += out.weights.weights[i] * obs[i].rate();
    out.estimate = est;
  }

  double weighted_cov = 0.0;
  for (int i = 0; i < n; ++i) weighted_cov += out.weights.weights[i] * cov[i];
  if (vc == VarianceConvention::full_ok)
    out.variance = covariance_from_variogram(model, 0.0) - weighted_cov -
                   out.weights.lagrange;
  else
    out.variance = weighted_cov;
  return out;
}

PointPrediction clamp_prediction(RawPrediction raw) {
  PointPrediction p;
  p.estimate = std::max(0.0, raw.estimate);
  p.variance = std::max(0.0, raw.variance);
  p.weights = std::move(raw.weights);
  return p;
}

void validate_inputs(std::span<const ObservationRecord> obs,
                     const VariogramModel& model, bool poisson, double m_hat,
                     double x0, double y0) {
  model.validate();
  validate_observations(obs);
  if (!finite(x0) || !finite(y0))
    throw ValidationError("prediction point must be finite");
  if (poisson) {
    if (obs.empty())
      throw ValidationError("count-aware kriging needs at least 1 observation");
    if (!finite(m_hat) || m_hat <= 0.0)
      throw ValidationError("mean rate m_hat must be > 0");
  } else if (obs.size() < 2) {
    throw ValidationError("ordinary kriging needs at least 2 observations");
  }
}

}  // namespace

double covariance_from_variogram(const VariogramModel& model, double h) {
  return model.sill - model_gamma(model, h);
}

PointPrediction solve_poisson_kriging(std::span<const ObservationRecord> obs,
                                      const VariogramModel& model,
                                      double m_hat, double x0, double y0,
                                      VarianceConvention vc) {
  validate_inputs(obs, model, true, m_hat, x0, y0);
  const FactoredSystem sys = factor_system(obs, model, true, m_hat);
  return clamp_prediction(predict_raw(obs, model, sys, x0, y0, vc));
}

PointPrediction solve_ordinary_kriging(std::span<const ObservationRecord> obs,
                                       const VariogramModel& model, double x0,
                                       double y0, VarianceConvention vc) {
  validate_inputs(obs, model, false, 0.0, x0, y0);
  const FactoredSystem sys = factor_system(obs, model, false, 0.0);
  return clamp_prediction(predict_raw(obs, model, sys, x0, y0, vc));
}

KrigingMap krige_grid(std::span<const ObservationRecord> obs,
                      const VariogramModel& model, double m_hat,
                      const GridSpec& spec, KrigingMethod method,
                      VarianceConvention vc) {
  spec.validate();
  const bool poisson = method == KrigingMethod::poisson;
  validate_inputs(obs, model, poisson, m_hat, spec.origin_x, spec.origin_y);
  const FactoredSystem sys = factor_system(obs, model, poisson, m_hat);

  KrigingMap map;
  map.spec = spec;
  map.estimate.reserve(spec.size());
  map.variance.reserve(spec.size());
  for (int iy = 0; iy < spec.ny; ++iy) {
    for (int ix = 0; ix < spec.nx; ++ix) {
      RawPrediction raw = predict_raw(obs, model, sys, spec.node_x(ix),
                                      spec.node_y(iy), vc);
      if (raw.estimate < 0.0) ++map.clamped_estimates;
      map.estimate.push_back(std::max(0.0, raw.estimate));
      map.variance.push_back(std::max(0.0, raw.variance));
    }
  }
  return map;
}

}  // namespace pkx
