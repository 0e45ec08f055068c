#pragma once

#include <cstdint>
#include <vector>

namespace dga {

/// splitmix64 step; used to expand seeds into generator state.
std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256++ generator seeded through splitmix64.
///
/// The algorithm is fully specified here (no dependence on the platform's
/// library distributions), so a given seed produces the same draw sequence
/// on every platform. A generator is single-owner; for parallel work derive
/// child generators with split().
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53 random mantissa bits.
  double uniform01();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// True with probability p.
  bool bernoulli(double p);

  /// Unbiased integer in [0, n) by rejection sampling. n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Child generator derived deterministically from this one's stream.
  /// Advances this generator by one draw.
  Rng split();

 private:
  std::uint64_t s_[4];
};

/// Fisher-Yates shuffle driven by Rng::below, identical on every platform.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

}  // namespace dga
