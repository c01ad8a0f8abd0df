#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace modescope {

/// splitmix64 finalizer; decorrelates consecutive seed values.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Child seed for stream `index` under `master`. Streams are decorrelated by
/// xoring with multiples of the golden-ratio increment before mixing, so
/// (master, 0), (master, 1), ... and nested splits stay disjoint in practice.
inline constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;
  return mix64(master ^ (golden * (index + 1)));
}

/// Seeded draw source with a fixed uniform->gaussian mapping.
///
/// std::normal_distribution is implementation-defined; Monte-Carlo results
/// here must be reproducible from the seed alone, so the gaussian transform
/// is pinned to Box-Muller on 53-bit uniforms.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform draw on (0, 1].
  double uniform01() {
    return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard real gaussian, N(0, 1).
  double gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Circularly symmetric complex gaussian with E|z|^2 = 1.
  std::complex<double> complex_gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace modescope
