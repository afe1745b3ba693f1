#pragma once

// Seed derivation and counting statistics. Every stochastic operation takes
// an explicit seed; per-point seeds are derived from the master seed with
// splitmix64 so results do not depend on scheduling or worker count.

#include <cstdint>
#include <random>

namespace nvmix {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stable per-(point, stream) seed from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t stream = 0) {
  std::uint64_t s = master ^ (0xD1B54A32D192ED03ULL * (index + 1)) ^
                    (0x8CB92BA72F3D8DD7ULL * (stream + 1));
  std::uint64_t a = splitmix64(s);
  return splitmix64(s) ^ a;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64{seed};
}

inline long long sample_poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long long> dist(mean);
  return dist(rng);
}

}  // namespace nvmix
