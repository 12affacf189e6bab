#include "petx/rng.hpp"

#include <cmath>
#include <numbers>

namespace petx {

double standard_normal(SplitMix64& rng) noexcept {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // Run the combined value through one SplitMix64 step so that nearby
  // master seeds or similar names do not produce correlated streams.
  SplitMix64 mix(master ^ h);
  return mix();
}

}  // namespace petx
