#pragma once

#include <cstdint>
#include <random>

namespace ramacity {

/// Seeded generator with a platform-independent uniform draw.
/// std::uniform_real_distribution is implementation-defined, so outputs that
/// must be byte-identical everywhere go through this instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ramacity
