#pragma once

#include <cmath>
#include <cstdint>

namespace pkx {

// Counter-based PRNG (SplitMix64). State is a plain counter advanced by the
// golden-ratio increment; every output is an avalanche hash of the counter.
// That makes replay and substream derivation trivial: any (seed, stream)
// pair maps to a fixed, decorrelated sequence regardless of how many draws
// other streams consumed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state = 0) : state_(state) {}

  // Stream `stream` of run `seed`. Hashing the seed before adding the stream
  // index and hashing again places substream counters at effectively random
  // offsets, so consecutive stream indices do not yield overlapping counter
  // windows the way `seed + stream` would.
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
    return SplitMix64(mix(mix(seed) + stream));
  }

  std::uint64_t next() { return mix(state_ += kGolden); }

  // Uniform in [0, 1), 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Exact Poisson sample, Knuth product-of-uniforms. Means above 60 are split
// in half recursively (sum of independent Poisson halves is Poisson in the
// total), keeping the uniform product away from double underflow.
inline long long poisson_draw(SplitMix64& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  long long total = 0;
  while (mean > 60.0) {
    mean *= 0.5;
    total += poisson_draw(rng, mean);
  }
  const double limit = std::exp(-mean);
  double prod = rng.uniform();
  long long k = 0;
  while (prod > limit) {
    prod *= rng.uniform();
    ++k;
  }
  return total + k;
}

}  // namespace pkx
