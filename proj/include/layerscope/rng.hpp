#pragma once

#include <array>
#include <cstdint>

namespace layerscope {

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for output `index` of a run rooted at `root`; independent of the
/// order in which outputs are generated.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

/// xoshiro256** seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform double in [0, 1) with 53 bits of resolution.
  double unit();
  /// Uniform double in [a, b).
  double uniform(double a, double b);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_;
};

}  // namespace layerscope
