#ifndef PETX_RNG_HPP
#define PETX_RNG_HPP

#include <cstdint>
#include <string_view>

namespace petx {

// SplitMix64: 64-bit splittable generator (Steele, Lea & Flood 2014).
// Satisfies UniformRandomBitGenerator, so std distributions work on top.
// split() derives an independent stream; all sequences are reproducible
// from the seed alone.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Independent child stream; advances this generator once.
  SplitMix64 split() noexcept { return SplitMix64((*this)() ^ 0x6a09e667f3bcc909ULL); }

 private:
  std::uint64_t state_;
};

// Uniform draw on (0,1): never returns an exact 0 or 1, so logs are finite.
inline double uniform01(SplitMix64& rng) noexcept {
  // 53 random bits shifted into (0,1); +0.5 keeps the draw off both endpoints.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller (cosine branch only). Exactly two uniform
// draws per call and no hidden spare-value cache, so the stream position
// after n calls is the same on every platform.
double standard_normal(SplitMix64& rng) noexcept;

// Stable 64-bit seed for a named work unit (e.g. a site id) derived from a
// master seed. FNV-1a over the name, mixed with the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view name) noexcept;

}  // namespace petx

#endif  // PETX_RNG_HPP
