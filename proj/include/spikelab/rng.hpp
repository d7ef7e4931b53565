#pragma once

#include <cmath>
#include <cstdint>

namespace spikelab {

// SplitMix64 — 64-bit state expander with full avalanche (Steele/Lea/Flood).
// Used only to seed the main generator from (master_seed, stream) pairs.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

// xoshiro256++ (Blackman & Vigna). 256-bit state, period 2^256-1.
//
// Stream k of a master seed is initialized from
// SplitMix64(master_seed + k * 0x9E3779B97F4A7C15), the generator authors'
// recommended seeding recipe; SplitMix64's avalanche decorrelates adjacent
// stream indices. Every replicate's randomness is therefore a pure function
// of (master_seed, k), independent of thread scheduling.
class Rng {
public:
  explicit Rng(std::uint64_t master_seed, std::uint64_t stream = 0) {
    SplitMix64 sm(master_seed + stream * 0x9E3779B97F4A7C15ull);
    for (auto& w : s_) w = sm.next();
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1; // all-zero state is the one forbidden point
  }

  // The seed value that identifies stream k of a master seed; passing it to
  // Rng(seed) reproduces Rng(master_seed, k).
  static std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream) {
    return master_seed + stream * 0x9E3779B97F4A7C15ull;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u = 1.0 - uniform(); // (0, 1], keeps log() finite
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 6.283185307179586476925286766559 * v;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace spikelab
