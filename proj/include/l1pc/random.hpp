#ifndef L1PC_RANDOM_HPP
#define L1PC_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "l1pc/common.hpp"

namespace l1pc {

// All sampling goes through mt19937_64 raw draws plus the explicit transforms
// below. The engine's output sequence is pinned by the C++ standard and the
// transforms avoid distribution classes, whose streams vary across standard
// libraries; identical seeds therefore give identical datasets everywhere.
using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives an independent stream for substream `which` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t which) {
  return splitmix64(seed + (which + 1) * 0x9E3779B97F4A7C15ULL);
}

// Uniform double in [0, 1) with 53 random bits.
inline double unit_uniform(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_in(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(eng);
}

// Standard normal via the Marsaglia polar method. One value per call; the
// second root of each accepted pair is discarded so the draw count per sample
// is stable and per-point substreams stay aligned.
inline double standard_normal(Engine& eng) {
  for (;;) {
    const double u = 2.0 * unit_uniform(eng) - 1.0;
    const double v = 2.0 * unit_uniform(eng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

// Uniform integer in [0, bound) by rejection, so every bound is unbiased.
inline std::uint64_t bounded_uint(Engine& eng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
  for (;;) {
    const std::uint64_t raw = eng();
    if (raw < limit) return raw % bound;
  }
}

// First `count` entries of a Fisher-Yates shuffle of [0, total): a uniform
// sample of distinct indices, order-sensitive to the engine state only.
inline std::vector<Index> sample_without_replacement(Engine& eng, Index total,
                                                    Index count) {
  std::vector<Index> pool(static_cast<std::size_t>(total));
  for (Index i = 0; i < total; ++i) pool[static_cast<std::size_t>(i)] = i;
  const Index take = count < total ? count : total;
  for (Index i = 0; i < take; ++i) {
    const Index j =
        i + static_cast<Index>(bounded_uint(eng, std::uint64_t(total - i)));
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(take));
  return pool;
}

}  // namespace l1pc

#endif  // L1PC_RANDOM_HPP
