#pragma once

// Deterministic stateless hashing and a small counter-based RNG.
// Everything downstream (random media, multistart perturbations, probe
// generators in tests) draws from these, so results are reproducible from a
// master seed independently of evaluation order and platform.

#include <cstdint>

namespace phasecell {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash of (seed, z) for lattice cells z; order of mixing is fixed.
inline std::uint64_t mix_hash(std::uint64_t seed, const std::int64_t* z, int n) {
  std::uint64_t h = splitmix64(seed);
  for (int i = 0; i < n; ++i)
    h = splitmix64(h ^ static_cast<std::uint64_t>(z[i]));
  return h;
}

// Uniform double in [0,1) from 53 high bits.
inline double to_unit_double(std::uint64_t u) {
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}

// Sequential generator: state advances by splitmix64 steps.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  double uniform01() { return to_unit_double(next_u64()); }

  // Uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Symmetric uniform in [-a, a)
  double symmetric(double a) { return uniform(-a, a); }

 private:
  std::uint64_t state_;
};

}  // namespace phasecell
