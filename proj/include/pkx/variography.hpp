#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pkx/field.hpp"

namespace pkx {

// Gaussian semivariogram gamma(h) = nugget + (sill - nugget) *
// (1 - exp(-h^2 / range^2)).
struct VariogramModel {
  double nugget = 0.0;  // (counts/s)^2, >= 0
  double range = 1.0;   // metres, > 0
  double sill = 1.0;    // (counts/s)^2, >= nugget

  void validate() const;
};

double model_gamma(const VariogramModel& model, double h);

// Duration-weighted mean rate: sum(counts) / sum(durations).
double weighted_mean_rate(std::span<const ObservationRecord> obs);

// Binned, duration-weighted empirical semivariogram. Only populated bins are
// retained; values are floored at zero after the counting-noise correction.
struct EmpiricalVariogram {
  std::vector<double> lag;     // bin centres, strictly increasing
  std::vector<double> gamma;   // (counts/s)^2
  std::vector<double> weight;  // N(h): sum over pairs of t_i t_j / (t_i + t_j)
  std::vector<std::size_t> pair_count;
  double bin_width = 0.0;
  double max_lag = 0.0;

  std::size_t bins() const { return lag.size(); }
};

// Half-open distance bins of `bin_width` starting at zero, bin centres up to
// `max_lag`. Each unordered pair contributes
//   (t_i t_j / (t_i + t_j)) * (z_i/t_i - z_j/t_j)^2 - m_hat
// to its bin's numerator, where m_hat is the duration-weighted mean rate of
// the whole sample; the estimate divides by twice the bin weight.
EmpiricalVariogram empirical_variogram(std::span<const ObservationRecord> obs,
                                       double bin_width, double max_lag);

struct VariogramFitConfig {
  VariogramModel fallback;      // returned when fitting is not possible
  double initial_sill = -1.0;   // <= 0: derive from the empirical values
  double initial_range = -1.0;  // <= 0: max_lag / 3
  double loss_scale = 1.0;      // soft-L1 scale, (counts/s)^2
  int max_iterations = 4000;
};

struct VariogramFit {
  VariogramModel model;
  bool fallback_used = false;
  double loss = 0.0;
};

// Least-soft-L1 fit of the Gaussian model. The parameters are optimized in a
// transformed space (nugget = a^2, range = exp(b), sill = nugget + c^2) so
// the constraints nugget >= 0, range > 0, sill >= nugget hold by
// construction; the range saturates at three times the largest binned lag,
// beyond which it is not identifiable from the data. Fewer than three
// populated bins, or a non-finite optimum, yields the fallback model with
// fallback_used set instead of an error.
VariogramFit fit_gaussian_model(const EmpiricalVariogram& emp,
                                const VariogramFitConfig& cfg);

}  // namespace pkx
