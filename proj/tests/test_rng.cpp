#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "spikelab/rng.hpp"

using spikelab::Rng;
using spikelab::SplitMix64;

TEST_CASE("rng is a pure function of (master_seed, stream)") {
  Rng a(42, 7);
  Rng b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  // stream_seed(m, k) names the same stream as Rng(m, k).
  Rng c(Rng::stream_seed(42, 7));
  Rng d(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(c.next_u64() == d.next_u64());
}

TEST_CASE("adjacent streams are decorrelated") {
  Rng a(123, 0);
  Rng b(123, 1);
  int agree = 0;
  for (int i = 0; i < 4096; ++i) {
    const std::uint64_t ua = a.next_u64();
    const std::uint64_t ub = b.next_u64();
    if (ua == ub) ++agree;
    // bitwise correlation check: popcount of xor should hover around 32
    const int pop = __builtin_popcountll(ua ^ ub);
    CHECK(pop > 8);
    CHECK(pop < 56);
  }
  CHECK(agree == 0);
}

TEST_CASE("splitmix64 reference values") {
  // Published test vector for seed 1234567 (Vigna's splitmix64.c output).
  SplitMix64 sm(1234567);
  CHECK(sm.next() == 6457827717110365317ull);
  CHECK(sm.next() == 3203168211198807973ull);
  CHECK(sm.next() == 9817491932198370423ull);
}

TEST_CASE("uniform draws live in [0,1) with the right first moments") {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  // 5 sigma bands: SE(mean) = sqrt(1/12/n), SE(var) ~ sqrt(1/180/n) * ...
  CHECK(std::fabs(mean - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::fabs(var - 1.0 / 12.0) < 6.0 * std::sqrt(1.0 / 180.0 / n));
}

TEST_CASE("normal draws match the first four Gaussian moments") {
  Rng rng(9001);
  const int n = 400000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    m1 += x;
    m2 += x * x;
    m3 += x * x * x;
    m4 += x * x * x * x;
  }
  m1 /= n;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  CHECK(std::fabs(m1) < 5.0 / std::sqrt(double(n)));                 // SE = 1/sqrt(n)
  CHECK(std::fabs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));             // Var x^2 = 2
  CHECK(std::fabs(m3) < 5.0 * std::sqrt(15.0 / n));                  // Var x^3 = 15
  CHECK(std::fabs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));            // Var x^4 = 96
}

TEST_CASE("rademacher draws are +-1 and balanced") {
  Rng rng(5);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.rademacher();
    CHECK((x == 1.0 || x == -1.0));
    sum += x;
  }
  CHECK(std::fabs(sum / n) < 5.0 / std::sqrt(double(n)));
}

TEST_CASE("normal cache does not leak across independently seeded generators") {
  // Draw one normal (leaves a spare cached), then reseed: the fresh generator
  // must not see the stale spare.
  Rng a(77);
  (void)a.normal();
  Rng b(77);
  Rng c(77);
  CHECK(b.normal() == c.normal());
  CHECK(b.normal() == c.normal());
  CHECK(b.normal() == c.normal());
}
