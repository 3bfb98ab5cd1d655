#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sscool {

/// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of trajectory `index` in the ensemble identified by `master_seed`.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return mix64(mix64(master_seed) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

inline std::vector<std::uint64_t> ensemble_seeds(std::uint64_t master_seed, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = derive_seed(master_seed, i);
  return seeds;
}

/// Per-trajectory stream. Platform independent: mt19937_64 and seed_seq are
/// fully specified, and doubles are built from the top 53 bits directly.
class TrajectoryRng {
 public:
  explicit TrajectoryRng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sscool
