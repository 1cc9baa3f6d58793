#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "pkx/rng.hpp"

using pkx::SplitMix64;

TEST_CASE("identical seeds reproduce the same stream") {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("substreams of one seed do not collide") {
  SplitMix64 a = SplitMix64::substream(7, 0);
  SplitMix64 b = SplitMix64::substream(7, 1);
  SplitMix64 c = SplitMix64::substream(8, 0);
  int ab = 0, ac = 0;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t va = a.next();
    if (va == b.next()) ++ab;
    if (va == c.next()) ++ac;
  }
  CHECK(ab == 0);
  CHECK(ac == 0);
}

TEST_CASE("uniform stays in [0,1) with a sane mean") {
  SplitMix64 rng(123);
  double sum = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.02);
}

TEST_CASE("poisson draws match the target moments") {
  SplitMix64 rng(99);
  const int n = 40000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    double v = static_cast<double>(pkx::poisson_draw(rng, 4.0));
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean - 4.0) < 0.05);
  CHECK(var > 3.8);
  CHECK(var < 4.2);
}

TEST_CASE("poisson splitting handles large means") {
  SplitMix64 rng(17);
  const int n = 20000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    double v = static_cast<double>(pkx::poisson_draw(rng, 250.0));
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean - 250.0) < 0.5);
  CHECK(var > 235.0);
  CHECK(var < 265.0);
}

TEST_CASE("non-positive mean yields zero counts") {
  SplitMix64 rng(5);
  CHECK(pkx::poisson_draw(rng, 0.0) == 0);
  CHECK(pkx::poisson_draw(rng, -3.0) == 0);
}
