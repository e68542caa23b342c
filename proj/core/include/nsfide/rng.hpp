#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nsfide {

/// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-path seed derivation. Injective in path_index for a fixed base seed
/// (splitmix64 is a bijection applied to distinct inputs).
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t path_index) {
  return splitmix64(base_seed ^ splitmix64(path_index + 1));
}

/// mt19937_64 with an explicitly coded Box-Muller draw, so the Gaussian
/// stream is reproducible independent of the standard library's
/// std::normal_distribution implementation.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    // 53-bit mantissa uniform in (0,1); never returns 0.
    const std::uint64_t r = engine_();
    return (static_cast<double>(r >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 6.283185307179586476925286766559 * u2;
    spare_ = rad * std::sin(ang);
    have_spare_ = true;
    return rad * std::cos(ang);
  }

  void fill_normal(double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = normal();
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nsfide
