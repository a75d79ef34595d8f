#include "cellfa/rng.hpp"

#include <cmath>
#include <numbers>

namespace cellfa {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // Two splitmix64 rounds over seed, then stream folded in and mixed again.
  auto split = [](std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t state = seed;
  std::uint64_t a = split(state);
  state ^= stream * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL;
  std::uint64_t b = split(state);
  return a ^ (b + 0x632be59bd9b4e019ULL);
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite; u2 in [0, 1).
  double u1 = 1.0 - uniform01();
  double u2 = uniform01();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace cellfa
