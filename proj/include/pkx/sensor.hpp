#pragma once

#include <climits>
#include <cmath>

#include "pkx/field.hpp"
#include "pkx/rng.hpp"

namespace pkx {

// Counting epoch: the detector reports accumulated counts every 10 s, so all
// dwell times are multiples of this.
inline constexpr double kTickSeconds = 10.0;

// Weather / reference-monitor context for count normalization. Defaults are
// neutral: every correction factor evaluates to exactly 1.
struct EnvConditions {
  double cosmic_rate = 100.0;       // C, neutron monitor counts/s
  double cosmic_ref = 100.0;        // C0, monitor reference
  double pressure_hpa = 1013.25;    // P
  double pressure_ref_hpa = 1013.25;  // P0
  double beta_per_hpa = 0.0076;     // barometric attenuation coefficient
  double humidity_gm3 = 5.0;        // Q, absolute humidity
  double humidity_ref_gm3 = 5.0;    // Q0

  void validate() const;
};

struct CorrectionFactors {
  double pressure = 1.0;  // exp(beta * (P - P0))
  double humidity = 1.0;  // 1 + 0.00054 * (Q - Q0)
  double cosmic = 1.0;    // C0 / C

  double product() const { return pressure * humidity * cosmic; }
};

CorrectionFactors correction_factors(const EnvConditions& env);

// Applies all three multiplicative corrections to a raw count total.
double correct_counts(double n_raw, const EnvConditions& env);

// Counting noise of the rate estimate: lambda_hat / sqrt(N_crr).
double measurement_sigma(double lambda_hat, double n_crr);

// One finished sensing event with the derived rate and its uncertainty.
// When no counts accumulated the sigma fields are NaN and sigma_valid is
// false; the rate estimate (0) is still usable.
struct Measurement {
  double x = 0.0;
  double y = 0.0;
  long long ticks = 0;             // number of 10 s intervals
  long long raw_counts = 0;
  double corrected_counts = 0.0;
  double duration = 0.0;           // seconds, == ticks * 10
  double rate = 0.0;               // corrected_counts / duration
  double sigma = 0.0;              // absolute rate uncertainty
  double sigma_rel = 0.0;          // 1 / sqrt(corrected_counts)
  bool sigma_valid = false;
};

// Dwell policy at a waypoint. FMI counts for a fixed duration; AMI counts
// until the relative uncertainty 1/sqrt(N_crr) drops to `ami_threshold`, or
// gives up at `max_duration_s`.
struct SamplingRegime {
  enum class Kind { fmi, ami };

  Kind kind = Kind::ami;
  double fmi_duration_s = 600.0;   // positive multiple of 10
  double ami_threshold = 0.025;    // in (0, 1)
  double max_duration_s = 1800.0;  // >= 10

  static SamplingRegime fmi(double duration_s);
  static SamplingRegime ami(double threshold, double max_duration_s = 1800.0);

  void validate() const;

  // Smallest integer corrected-count total meeting the AMI target.
  double ami_count_target() const {
    return std::ceil(1.0 / (ami_threshold * ami_threshold));
  }
};

// Draws Poisson counts per tick at the field's local rate and folds in the
// normalization factors. `tick_budget` caps the dwell regardless of regime
// (used when a mission horizon is about to expire); it must be >= 1.
// The rng is taken by value: a measurement consumes a private substream.
Measurement simulate_measurement(const RateField& field, double x, double y,
                                 const SamplingRegime& regime, SplitMix64 rng,
                                 const EnvConditions& env = {},
                                 long long tick_budget = LLONG_MAX);

}  // namespace pkx
