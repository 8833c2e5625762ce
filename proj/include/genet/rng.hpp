#pragma once

#include <cstdint>
#include <span>

namespace genet {

/// xoshiro256** seeded through splitmix64.
///
/// The standard library distributions are implementation-defined, so every
/// draw the search makes goes through the members below instead; a seed
/// reproduces the same sequence on any platform built from this source.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform integer in [lo, hi] (inclusive) by rejection sampling.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  template <typename T>
  const T& pick(std::span<const T> items) {
    return items[static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(items.size()) - 1))];
  }

 private:
  std::uint64_t s_[4];
};

/// One splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace genet
