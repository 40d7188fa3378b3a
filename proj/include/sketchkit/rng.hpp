#pragma once

#include <cmath>
#include <cstdint>

namespace sketchkit {

// Small deterministic generator (splitmix64).  Every randomized routine in
// the library takes an explicit seed, so results are reproducible across
// platforms and thread counts.  Each gaussian() call consumes exactly two
// uniform draws; no call consumes a data-dependent number of draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; used where log() must not see zero.
  double next_double_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (no caching, so the draw count per call
  // is fixed at two uniforms).
  double next_gaussian() {
    const double u1 = next_double_pos();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [0, bound); bound >= 1.  next_double() < 1 guarantees
  // the product floors below bound.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(next_double() * static_cast<double>(bound));
  }

 private:
  std::uint64_t state_;
};

}  // namespace sketchkit
