#pragma once

#include <cstdint>
#include <span>

namespace bvvi {

/// Counter-based 64-bit generator.
///
/// Output i of stream (seed, stream) is splitmix64_finalize(key + i * phi),
/// where key = splitmix64_finalize(seed ^ splitmix64_finalize(stream + phi))
/// and phi = 0x9E3779B97F4A7C15. Draws never depend on thread scheduling:
/// a run derives one stream per episode from (master seed, episode index),
/// so any episode can be regenerated in isolation.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Index drawn from a probability vector. Entries need not sum to exactly
  /// one; the last index with positive mass absorbs rounding slack.
  int categorical(std::span<const double> probs) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t mix(std::uint64_t z) noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bvvi
