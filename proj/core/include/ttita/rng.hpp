#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace ttita {

/// Seeded random source threaded through initialization, dropout and
/// shuffling. The conversions from raw engine bits are written out here
/// rather than using <random> distributions, whose output is
/// implementation-defined, so results agree across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard Box-Muller; one engine draw pair per sample.
  double normal(double mean = 0.0, double stddev = 1.0);

  /// Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  /// Independent stream derived from this one's seed material.
  Rng fork(std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ttita
