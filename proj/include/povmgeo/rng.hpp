#pragma once

#include <cstdint>

namespace povmgeo {

/// Counter-based uniform stream (splitmix64). Streams derived from a master
/// seed are independent of evaluation order, so per-point sampling is
/// reproducible under any scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : state_(key) {}

  /// Stream for substream `index` of `master`.
  static CounterRng stream(std::uint64_t master, std::uint64_t index) {
    return CounterRng(mix(master ^ mix(index + 0x9E3779B97F4A7C15ULL)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

}  // namespace povmgeo
