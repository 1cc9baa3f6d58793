#include "pkx/variography.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "pkx/errors.hpp"

namespace pkx {

namespace {

bool finite(double v) { return std::isfinite(v); }

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec3 = std::array<double, 3>;

// Downhill simplex over a 3-vector; returns the best vertex and its value.
// Small, dependency-free, and deterministic, which is all the variogram fit
// needs.
template <typename F>
std::pair<Vec3, double> nelder_mead(F&& f, Vec3 start, Vec3 step,
                                    int max_iter) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  std::array<std::pair<double, Vec3>, 4> simplex;
  simplex[0] = {f(start), start};
  for (int i = 0; i < 3; ++i) {
    Vec3 v = start;
    v[i] += step[i];
    simplex[i + 1] = {f(v), v};
  }

  for (int iter = 0; iter < max_iter; ++iter) {
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const double fbest = simplex[0].first;
    const double fworst = simplex[3].first;

    double spread = std::fabs(fworst - fbest);
    double diameter = 0.0;
    for (int i = 0; i < 3; ++i)
      diameter = std::max(diameter,
                          std::fabs(simplex[3].second[i] - simplex[0].second[i]));
    if (spread <= 1e-15 * (1.0 + std::fabs(fbest)) && diameter <= 1e-11) break;

    Vec3 centroid{};
    for (int v = 0; v < 3; ++v)
      for (int i = 0; i < 3; ++i) centroid[i] += simplex[v].second[i] / 3.0;

    auto along = [&](double t) {
      Vec3 p;
      for (int i = 0; i < 3; ++i)
        p[i] = centroid[i] + t * (simplex[3].second[i] - centroid[i]);
      return p;
    };

    const Vec3 reflected = along(-kReflect);
    const double fr = f(reflected);
    if (fr < simplex[0].first) {
      const Vec3 expanded = along(-kExpand);
      const double fe = f(expanded);
      simplex[3] = fe < fr ? std::pair{fe, expanded} : std::pair{fr, reflected};
      continue;
    }
    if (fr < simplex[2].first) {
      simplex[3] = {fr, reflected};
      continue;
    }
    // contract, outside if the reflection helped at all
    const Vec3 contracted = fr < fworst ? along(-kContract) : along(kContract);
    const double fc = f(contracted);
    if (fc < std::min(fr, fworst)) {
      simplex[3] = {fc, contracted};
      continue;
    }
    for (int v = 1; v < 4; ++v) {
      Vec3 p;
      for (int i = 0; i < 3; ++i)
        p[i] = simplex[0].second[i] +
               kShrink * (simplex[v].second[i] - simplex[0].second[i]);
      simplex[v] = {f(p), p};
    }
  }

  std::sort(simplex.begin(), simplex.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return {simplex[0].second, simplex[0].first};
}

}  // namespace

void VariogramModel::validate() const {
  if (!finite(nugget) || nugget < 0.0)
    throw ValidationError("variogram nugget must be >= 0");
  if (!finite(range) || range <= 0.0)
    throw ValidationError("variogram range must be > 0");
  if (!finite(sill) || sill < nugget)
    throw ValidationError("variogram sill must be >= nugget");
}

double model_gamma(const VariogramModel& model, double h) {
  const double q = (h * h) / (model.range * model.range);
  return model.nugget + (model.sill - model.nugget) * (-std::expm1(-q));
}

double weighted_mean_rate(std::span<const ObservationRecord> obs) {
  validate_observations(obs);
  if (obs.empty()) throw ValidationError("no observations");
  double counts = 0.0;
  double time = 0.0;
  for (const ObservationRecord& r : obs) {
    counts += r.counts;
    time += r.duration;
  }
  return counts / time;
}

EmpiricalVariogram empirical_variogram(std::span<const ObservationRecord> obs,
                                       double bin_width, double max_lag) {
  validate_observations(obs);
  if (obs.size() < 2)
    throw ValidationError("empirical variogram needs at least 2 observations");
  if (!finite(bin_width) || bin_width <= 0.0)
    throw ValidationError("bin width must be > 0");
  if (!finite(max_lag) || max_lag <= 0.0)
    throw ValidationError("max lag must be > 0");

  // Bins [k*w, (k+1)*w) whose centres stay at or below max_lag.
  const std::size_t nbins = static_cast<std::size_t>(
      std::max(1.0, std::floor(max_lag / bin_width + 0.5)));
  const double reach = nbins * bin_width;
  const double m_hat = weighted_mean_rate(obs);

  std::vector<double> num(nbins, 0.0);
  std::vector<double> wsum(nbins, 0.0);
  std::vector<std::size_t> cnt(nbins, 0);

  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t j = i + 1; j < obs.size(); ++j) {
      const double d = std::hypot(obs[i].x - obs[j].x, obs[i].y - obs[j].y);
      if (d >= reach) continue;
      const std::size_t k = static_cast<std::size_t>(d / bin_width);
      if (k >= nbins) continue;
      const double ti = obs[i].duration;
      const double tj = obs[j].duration;
      const double w = ti * tj / (ti + tj);
      const double diff = obs[i].counts / ti - obs[j].counts / tj;
      num[k] += w * diff * diff - m_hat;
      wsum[k] += w;
      cnt[k] += 1;
    }
  }

  EmpiricalVariogram emp;
  emp.bin_width = bin_width;
  emp.max_lag = max_lag;
  for (std::size_t k = 0; k < nbins; ++k) {
    if (cnt[k] == 0) continue;
    emp.lag.push_back((k + 0.5) * bin_width);
    emp.gamma.push_back(std::max(0.0, num[k] / (2.0 * wsum[k])));
    emp.weight.push_back(wsum[k]);
    emp.pair_count.push_back(cnt[k]);
  }
  if (emp.lag.empty())
    throw ValidationError("no observation pairs within the max lag");
  return emp;
}

VariogramFit fit_gaussian_model(const EmpiricalVariogram& emp,
                                const VariogramFitConfig& cfg) {
  cfg.fallback.validate();
  if (!(cfg.loss_scale > 0.0) || !finite(cfg.loss_scale))
    throw ValidationError("loss scale must be > 0");
  if (cfg.max_iterations < 1)
    throw ValidationError("max iterations must be >= 1");
  if (emp.bins() < 3) return {cfg.fallback, true, 0.0};

  double sill0 = cfg.initial_sill;
  if (!(sill0 > 0.0) || !finite(sill0)) {
    // mean of the upper half of the empirical curve, where the sill lives
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t k = emp.bins() / 2; k < emp.bins(); ++k) {
      acc += emp.gamma[k];
      ++n;
    }
    sill0 = n ? acc / n : 0.0;
    if (!(sill0 > 0.0))
      sill0 = *std::max_element(emp.gamma.begin(), emp.gamma.end());
    if (!(sill0 > 0.0)) sill0 = 1e-6;
  }
  double range0 = cfg.initial_range;
  if (!(range0 > 0.0) || !finite(range0))
    range0 = std::max(emp.max_lag, emp.bin_width) / 3.0;

  // Unconstrained parameterization: nugget = a^2, range = exp(b),
  // sill = nugget + c^2. Both scale parameters saturate near the data's own
  // extent: when the empirical curve shows no shoulder inside the lag window
  // only the ratio sill/range^2 is identifiable, and an uncapped search
  // drifts along that ridge to astronomical pairs whose covariance matrices
  // are numerically rank-deficient and extrapolate wildly.
  const double range_cap =
      3.0 * *std::max_element(emp.lag.begin(), emp.lag.end());
  const double sill_cap =
      2.0 * *std::max_element(emp.gamma.begin(), emp.gamma.end());
  const auto decode = [range_cap, sill_cap](const Vec3& q) {
    const double nugget = q[0] * q[0];
    const double sill =
        std::min(nugget + q[2] * q[2], std::max(nugget, sill_cap));
    return VariogramModel{nugget, std::min(std::exp(q[1]), range_cap), sill};
  };
  const auto loss = [&](const Vec3& q) {
    const VariogramModel m = decode(q);
    if (!finite(m.range) || m.range <= 0.0 || !finite(m.sill)) return kInf;
    double s = 0.0;
    for (std::size_t k = 0; k < emp.bins(); ++k) {
      const double r = (model_gamma(m, emp.lag[k]) - emp.gamma[k]) / cfg.loss_scale;
      s += std::sqrt(1.0 + r * r) - 1.0;
    }
    return finite(s) ? s : kInf;
  };

  Vec3 q{0.0, std::log(range0), std::sqrt(sill0)};
  const double amp = 0.3 * std::sqrt(sill0) + 0.01;
  Vec3 step{amp, 0.4, amp};
  double best = kInf;
  for (int round = 0; round < 3; ++round) {
    auto [point, value] = nelder_mead(loss, q, step, cfg.max_iterations);
    q = point;
    best = value;
    step = {0.1 * amp, 0.05, 0.1 * amp};  // polish restarts from the optimum
  }

  const VariogramModel model = decode(q);
  if (!finite(best) || !finite(model.nugget) || !finite(model.range) ||
      model.range <= 0.0 || !finite(model.sill))
    return {cfg.fallback, true, 0.0};
  return {model, false, best};
}

}  // namespace pkx
