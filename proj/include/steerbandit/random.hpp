#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace steerbandit {

/// SplitMix64 finalizer applied to `master + (index + 1) * golden_gamma`.
/// This is the documented seed-derivation function for replication and
/// configuration streams: distinct indices give statistically independent
/// 64-bit seeds, and the result depends only on (master, index).
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Explicit random stream handle. There is no global RNG state; each
/// sampling routine takes one of these by reference.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard, and the uniform/categorical transforms are implemented here
/// rather than via <random> distributions (whose algorithms are
/// implementation-defined). Streams are therefore bit-reproducible across
/// standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  /// Stream for sub-task `index` of a run seeded with `master`.
  static RandomStream derive(std::uint64_t master, std::uint64_t index) {
    return RandomStream(mix_seed(master, index));
  }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() noexcept;

  /// Index drawn from the (nonnegative, summing to ~1) weights by inverse CDF.
  /// Zero-weight entries are never returned.
  std::size_t categorical(std::span<const double> probs) noexcept;

  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace steerbandit
