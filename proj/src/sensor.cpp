#include "pkx/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pkx/errors.hpp"

namespace pkx {

namespace {
bool finite(double v) { return std::isfinite(v); }
}  // namespace

void EnvConditions::validate() const {
  if (!finite(cosmic_rate) || cosmic_rate <= 0.0)
    throw ValidationError("monitor rate C must be > 0");
  if (!finite(cosmic_ref) || cosmic_ref <= 0.0)
    throw ValidationError("monitor reference C0 must be > 0");
  if (!finite(pressure_hpa) || pressure_hpa <= 0.0 ||
      !finite(pressure_ref_hpa) || pressure_ref_hpa <= 0.0)
    throw ValidationError("pressures must be > 0");
  if (!finite(beta_per_hpa))
    throw ValidationError("barometric coefficient must be finite");
  if (!finite(humidity_gm3) || humidity_gm3 < 0.0 ||
      !finite(humidity_ref_gm3) || humidity_ref_gm3 < 0.0)
    throw ValidationError("humidities must be >= 0");
  if (1.0 + 0.00054 * (humidity_gm3 - humidity_ref_gm3) <= 0.0)
    throw ValidationError("humidity correction factor must stay positive");
}

CorrectionFactors correction_factors(const EnvConditions& env) {
  env.validate();
  CorrectionFactors f;
  f.pressure = std::exp(env.beta_per_hpa * (env.pressure_hpa - env.pressure_ref_hpa));
  f.humidity = 1.0 + 0.00054 * (env.humidity_gm3 - env.humidity_ref_gm3);
  f.cosmic = env.cosmic_ref / env.cosmic_rate;
  if (!finite(f.pressure) || f.pressure <= 0.0)
    throw ValidationError("pressure correction factor is not positive finite");
  return f;
}

double correct_counts(double n_raw, const EnvConditions& env) {
  if (!finite(n_raw) || n_raw < 0.0)
    throw ValidationError("raw counts must be >= 0");
  return n_raw * correction_factors(env).product();
}

double measurement_sigma(double lambda_hat, double n_crr) {
  if (!finite(lambda_hat) || lambda_hat < 0.0)
    throw ValidationError("rate estimate must be >= 0");
  if (!finite(n_crr) || n_crr <= 0.0)
    throw ValidationError("sigma undefined for non-positive counts");
  return lambda_hat / std::sqrt(n_crr);
}

SamplingRegime SamplingRegime::fmi(double duration_s) {
  SamplingRegime r;
  r.kind = Kind::fmi;
  r.fmi_duration_s = duration_s;
  return r;
}

SamplingRegime SamplingRegime::ami(double threshold, double max_duration_s) {
  SamplingRegime r;
  r.kind = Kind::ami;
  r.ami_threshold = threshold;
  r.max_duration_s = max_duration_s;
  return r;
}

void SamplingRegime::validate() const {
  if (kind == Kind::fmi) {
    if (!finite(fmi_duration_s) || fmi_duration_s < kTickSeconds)
      throw ValidationError("FMI duration must be >= 10 s");
    const double ticks = fmi_duration_s / kTickSeconds;
    if (std::fabs(ticks - std::round(ticks)) > 1e-9)
      throw ValidationError("FMI duration must be a multiple of 10 s");
  } else {
    if (!finite(ami_threshold) || ami_threshold <= 0.0 || ami_threshold >= 1.0)
      throw ValidationError("AMI threshold must lie in (0, 1)");
    if (!finite(max_duration_s) || max_duration_s < kTickSeconds)
      throw ValidationError("AMI max duration must be >= 10 s");
  }
}

Measurement simulate_measurement(const RateField& field, double x, double y,
                                 const SamplingRegime& regime, SplitMix64 rng,
                                 const EnvConditions& env,
                                 long long tick_budget) {
  regime.validate();
  if (tick_budget < 1)
    throw ValidationError("tick budget must allow at least one interval");
  const double lambda = rate_at(field, x, y);
  const double factor = correction_factors(env).product();

  long long limit;
  if (regime.kind == SamplingRegime::Kind::fmi)
    limit = llround(regime.fmi_duration_s / kTickSeconds);
  else
    limit = static_cast<long long>(
        std::floor(regime.max_duration_s / kTickSeconds + 1e-9));
  limit = std::min(limit, tick_budget);

  long long raw = 0;
  long long ticks = 0;
  while (ticks < limit) {
    raw += poisson_draw(rng, lambda * kTickSeconds);
    ++ticks;
    if (regime.kind == SamplingRegime::Kind::ami) {
      const double n_crr = raw * factor;
      if (n_crr > 0.0 && 1.0 / std::sqrt(n_crr) <= regime.ami_threshold) break;
    }
  }

  Measurement m;
  m.x = x;
  m.y = y;
  m.ticks = ticks;
  m.raw_counts = raw;
  m.corrected_counts = raw * factor;
  m.duration = ticks * kTickSeconds;
  m.rate = m.corrected_counts / m.duration;
  if (m.corrected_counts > 0.0) {
    m.sigma_rel = 1.0 / std::sqrt(m.corrected_counts);
    m.sigma = measurement_sigma(m.rate, m.corrected_counts);
    m.sigma_valid = true;
  } else {
    m.sigma_rel = std::numeric_limits<double>::quiet_NaN();
    m.sigma = std::numeric_limits<double>::quiet_NaN();
    m.sigma_valid = false;
  }
  return m;
}

}  // namespace pkx
