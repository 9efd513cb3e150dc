#pragma once

#include <cstdint>

// Counter-based randomness built on the splitmix64 finalizer. Every draw in
// the library is keyed by (base_seed, index), so sampling order never
// affects results and independent draws can run in parallel.

namespace wmlab::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// Derives the seed for draw `index` of the stream rooted at `base`.
constexpr std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ (index + kGolden));
}

/// Maps 64 random bits to a double in [0, 1).
constexpr double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential splitmix64 stream for the few places that need more than one
/// draw from a single split seed.
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  constexpr double next_unit() { return unit_from_bits(next_u64()); }

  // Sum of three uniforms, centered and scaled to unit variance. Stays exact
  // across platforms because it avoids libm entirely.
  constexpr double next_standardish() {
    const double s = next_unit() + next_unit() + next_unit();
    return (s - 1.5) * 2.0;
  }

 private:
  std::uint64_t state_;
};

}  // namespace wmlab::rng
