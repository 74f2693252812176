#pragma once

#include <cstdint>
#include <limits>

namespace isoblock {

/// SplitMix64: output k is a bijective mix of (state0 + k * golden gamma), so
/// the generator is counter-based and streams can be derived by hashing.
/// Satisfies UniformRandomBitGenerator for use with <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  /// Independent stream for replicate `index` of an experiment seeded with `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix(mix(seed) ^ mix(index + 0x632be59bd9b4e019ULL)));
  }
  static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return stream(mix(seed ^ mix(a + 0x9e3779b97f4a7c15ULL)), b);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace isoblock
