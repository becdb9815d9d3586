#pragma once

#include <cstdint>

namespace mgems {

// Counter-based uniform draws. Every random quantity in the system is keyed by
// (seed, slot, quantity, lead), so the draw a consumer sees is independent of
// evaluation order, and paired scenarios (same seed, different mode or error
// scale) observe identical randomness.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t key_mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                             std::uint64_t c) {
  std::uint64_t h = splitmix64(seed ^ 0x6d67676d73726e67ULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

// Uniform in [0, 1).
inline double keyed_u01(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c) {
  return static_cast<double>(key_mix(seed, a, b, c) >> 11) * 0x1.0p-53;
}

// Uniform in [-1, 1).
inline double keyed_sym(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c) {
  return 2.0 * keyed_u01(seed, a, b, c) - 1.0;
}

}  // namespace mgems
