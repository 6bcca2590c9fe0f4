#pragma once

#include <cstdint>
#include <random>

namespace optwvp {

// We draw all randomness through these helpers instead of the std
// distributions: distribution algorithms are implementation-defined, and we
// promise bit-identical runs for a given seed on any platform.  mt19937_64's
// output sequence itself is pinned by the standard.

// Uniform double in [0, 1), 53 usable bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n).  Simple multiply-shift; the modulo bias of the
// naive approach is irrelevant at our sizes but this avoids it anyway.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace optwvp
