#pragma once

#include <cmath>
#include <cstdint>

namespace mpt {

// Deterministic xoshiro-free generator: mt19937_64 with explicit double
// conversion and Box-Muller normals. std::*_distribution is avoided because
// its output is implementation-defined; trajectories must be reproducible
// bit for bit from a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    // splitmix64 expansion of the seed into the mt19937_64 state
    state_seed_ = seed;
    std::uint64_t x = seed;
    for (int i = 0; i < 312; ++i) mt_[i] = splitmix(x);
    index_ = 312;
    have_spare_ = false;
  }

  std::uint64_t next_u64() {
    if (index_ >= 312) twist();
    std::uint64_t y = mt_[index_++];
    y ^= (y >> 29) & 0x5555555555555555ULL;
    y ^= (y << 17) & 0x71D67FFFEDA60000ULL;
    y ^= (y << 37) & 0xFFF7EEE000000000ULL;
    y ^= (y >> 43);
    return y;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  std::uint64_t seed() const { return state_seed_; }

  /// Derives an independent stream from a base seed and a stream tag.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (tag + 1));
    return splitmix(x);
  }

 private:
  static std::uint64_t splitmix(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  void twist() {
    constexpr std::uint64_t kLoMask = 0x7FFFFFFFULL;
    constexpr std::uint64_t kHiMask = ~kLoMask;
    for (int i = 0; i < 312; ++i) {
      const std::uint64_t x = (mt_[i] & kHiMask) | (mt_[(i + 1) % 312] & kLoMask);
      std::uint64_t y = x >> 1;
      if (x & 1ULL) y ^= 0xB5026F5AA96619E9ULL;
      mt_[i] = mt_[(i + 156) % 312] ^ y;
    }
    index_ = 0;
  }

  std::uint64_t mt_[312];
  int index_ = 312;
  std::uint64_t state_seed_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mpt
