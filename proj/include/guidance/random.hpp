#pragma once

#include <cstdint>
#include <random>

namespace guidance {

// Seeded random source with portable draws: the standard distributions are
// implementation-defined, so uniform doubles are built from raw engine bits.
class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in (0, 1].
  double uniform_open_left() { return 1.0 - uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace guidance
