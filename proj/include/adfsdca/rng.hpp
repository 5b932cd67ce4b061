#ifndef ADFSDCA_RNG_HPP
#define ADFSDCA_RNG_HPP

#include <cstdint>
#include <random>

namespace adfsdca {

/// Seeded 64-bit generator. Every sampler in the library consumes whole
/// 64-bit words through this type, so a run is reproducible from its seed
/// on any platform with the same mt19937_64 definition.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), bound > 0. Unbiased (Lemire's method).
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (low < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace adfsdca

#endif  // ADFSDCA_RNG_HPP
