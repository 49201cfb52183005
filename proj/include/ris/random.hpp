#pragma once

#include "ris/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ris {

/// SplitMix64 finalizer. Used to turn (seed, counter...) tuples into
/// well-mixed 64-bit seeds for independent substreams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Substream seed for a counter path, e.g. {x_index, trial, purpose}.
/// seed_0 = splitmix64(master); seed_{i+1} = splitmix64(seed_i ^ counter_i).
/// Each trial therefore depends only on its own indices, never on execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(master);
  for (auto c : path) s = splitmix64(s ^ c);
  return s;
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  RandomStream substream(std::initializer_list<std::uint64_t> path) const {
    return RandomStream(derive_seed(seed_hint(), path));
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  cdouble complex_normal(double variance = 1.0) {
    if (variance <= 0.0) return {0.0, 0.0};
    const double s = std::sqrt(variance / 2.0);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  double uniform_phase() { return uniform(0.0, 2.0 * kPi); }

  std::mt19937_64& engine() { return engine_; }

 private:
  // Engine state is not hashable cheaply; the first output of a copy is a
  // stable function of the seed and the draws consumed so far.
  std::uint64_t seed_hint() const {
    auto copy = engine_;
    return copy();
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ris
