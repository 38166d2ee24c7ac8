#pragma once

#include <cmath>
#include <cstdint>

namespace rcpinn {

// splitmix64 finalizer; used for seed expansion and substream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stream-splitting rule: substream q of a master seed is
// splitmix64(seed + (q+1) * 0x9E3779B97F4A7C15). Each temperature in a sweep
// (and each multistart restart) draws from its own substream, so parallel
// generation cannot change the result.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t q) {
  std::uint64_t s = seed + (q + 1) * 0x9E3779B97F4A7C15ull;
  return splitmix64(s);
}

// xoshiro256++ (Blackman & Vigna). The integer stream is identical on every
// platform; float transforms inherit libm, so byte-identical output is
// guaranteed per platform.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next() {
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

  // uniform in (0,1), strictly; 53-bit resolution
  double uniform01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller. Two uniforms are consumed per deviate and
  // the sine partner is discarded, so stream position per sample is fixed.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace rcpinn
