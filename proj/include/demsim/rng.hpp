#pragma once

#include <cstdint>

namespace demsim {

// Counter-based deterministic RNG. Each stream is derived from a master
// seed plus a stream index, so results are independent of evaluation
// order and parallel partitioning.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
};

// Stream seed for substream `index` of master `seed`.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mix(seed ^ (0x5851f42d4c957f2dULL * (index + 1)));
  return mix.next_u64();
}

}  // namespace demsim
