#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace flairkit {

/// Counter-based generator: draw n returns splitmix64(key + n * golden), where
/// key is derived from (seed, stream). No hidden state besides the counter, so
/// a draw sequence is reproducible across platforms and languages.
///
/// Derived draws consume counters in a fixed pattern:
///   uniform()        1 draw, top 53 bits / 2^53
///   uniform_int()    1 draw, lo + floor(uniform() * (hi - lo + 1))
///   normal()         2 draws, Box-Muller cosine branch (u1 first, u2 second)
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive bounds.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const double span = static_cast<double>(hi - lo + 1);
    auto v = lo + static_cast<std::int64_t>(std::floor(uniform() * span));
    return v > hi ? hi : v;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace flairkit
