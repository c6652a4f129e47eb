#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Seeded random streams. Every random draw in the project flows from one
// root seed through named stream derivation, so runs are reproducible and
// per-node streams are independent of thread count or visit order.
//
// std::mt19937_64 is fully specified by the standard; the double/int
// helpers below avoid std::*_distribution, whose output is
// implementation-defined.

#include <random>

namespace bigraph::rng {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the named stream derived from a root seed.
inline std::uint64_t derive(std::uint64_t root, std::string_view stream) {
  return mix64(root ^ fnv1a64(stream));
}

/// Indexed variant, e.g. one stream per node or per epoch.
inline std::uint64_t derive(std::uint64_t root, std::string_view stream,
                            std::uint64_t index) {
  return mix64(derive(root, stream) ^ mix64(index + 0x51ed2701ULL));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

/// Uniform double in [0, 1) with 53 random bits.
inline double next_double(Engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). n must be positive.
inline std::uint64_t next_below(Engine& g, std::uint64_t n) {
  // rejection sampling on the top of the range keeps the draw unbiased
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t x = g();
  while (x > limit) x = g();
  return x % n;
}

/// Uniform double in [lo, hi).
inline double next_uniform(Engine& g, double lo, double hi) {
  return lo + (hi - lo) * next_double(g);
}

/// Standard normal via Box-Muller.
inline double next_normal(Engine& g) {
  double u1 = next_double(g);
  while (u1 <= 0.0) u1 = next_double(g);
  const double u2 = next_double(g);
  const double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace bigraph::rng
