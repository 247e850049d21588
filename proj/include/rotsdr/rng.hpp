#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace rotsdr {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// SplitMix64 driven in counter mode. Each (seed, stream) pair is an
/// independent substream, so per-pair generation is order-independent.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream)
      : key_(splitmix64(seed ^ splitmix64(stream + 0x51ED2701FFB3A0E5ull))) {}

  uint64_t next_u64() { return splitmix64(key_ + 0x9E3779B97F4A7C15ull * ++ctr_); }

  /// Uniform in [0, 1).
  double next_uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe as a log() argument.
  double next_uniform_open() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (second value cached).
  double next_gaussian();

  Eigen::Vector3d gaussian3();
  Eigen::Vector4d gaussian4();
  Eigen::Vector3d uniform_sphere3();

 private:
  uint64_t key_;
  uint64_t ctr_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rotsdr
