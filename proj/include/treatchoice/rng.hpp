#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace treatchoice {

/// Deterministic standard-normal sampler: Box-Muller over mt19937_64.
/// std::normal_distribution's draw sequence is implementation-defined, so
/// seeded outputs would not be stable across standard libraries; this is.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = unit_open();
    const double u2 = unit_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  std::uint64_t raw() { return rng_(); }

 private:
  // 53-bit uniform on (0, 1]; never 0, so log(u) is finite.
  double unit_open() { return static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53; }

  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace treatchoice
