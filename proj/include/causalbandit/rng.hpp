#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace causalbandit {

/// Counter-based generator keyed by a 64-bit stream id.
///
/// Output i of a stream is a SplitMix64 finalizer applied to
/// key + i * golden, so streams can be derived and split without shared
/// state. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  // Stream for (seed, ids...), e.g. derive(master_seed, {point, run}).
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

  // Child stream; does not advance this one.
  Rng split(std::uint64_t id) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    return mix(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform integer in [0, bound); bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;
  // Uniform double in [0, 1).
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) noexcept { return uniform01() < p; }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  struct Keyed {};
  Rng(Keyed, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace causalbandit
