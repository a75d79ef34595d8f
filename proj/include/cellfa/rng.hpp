#pragma once

#include <cstdint>
#include <random>

namespace cellfa {

// splitmix64 step; spreads (seed, stream) pairs into well-separated engine seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic random stream. The uniform and normal transforms are spelled
// out here instead of using <random> distributions, whose output sequences are
// implementation-defined; mt19937_64 itself is fully specified by the standard.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : engine_(mix_seed(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cellfa
