#pragma once

#include <cstdint>
#include <random>

namespace hy3d {

using Rng = std::mt19937_64;

/// Uniform double in [lo, hi). Implemented directly on the engine output so
/// the stream is identical across standard-library implementations.
inline double uniform(Rng& rng, double lo, double hi) {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace hy3d
