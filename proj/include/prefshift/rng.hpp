#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

namespace prefshift {

/// Deterministic, splittable random stream (xoshiro256++ seeded via splitmix64).
///
/// Every stochastic routine in the library takes an explicit Rng so results
/// are a pure function of the master seed. Parallel work derives one stream
/// per slot with split(slot); the derivation is stable across runs and
/// independent of thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (no cached second value, for reproducibility).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Sample an index from an (unnormalized is fine) non-negative weight vector.
  int categorical(const Eigen::VectorXd& weights) {
    const double total = weights.sum();
    double r = uniform01() * total;
    for (int i = 0; i < weights.size(); ++i) {
      r -= weights[i];
      if (r < 0.0) return i;
    }
    return static_cast<int>(weights.size()) - 1;
  }

  /// Derive an independent stream. Documented split: the child is seeded with
  /// splitmix64(base_seed_word ^ golden-ratio-scrambled stream id).
  Rng split(std::uint64_t stream) const {
    std::uint64_t s = state_[0] ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    return Rng(splitmix64(s));
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace prefshift
