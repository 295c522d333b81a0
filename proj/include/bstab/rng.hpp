#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "bstab/grid.hpp"

namespace bstab {

/// Deterministic random source. Gaussian draws are generated by Box-Muller
/// on raw mt19937_64 output so streams are reproducible independent of the
/// standard library's distribution internals.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // in [0,1)
    return (eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Vec gaussian_vec(Eigen::Index n) {
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = gaussian();
    return x;
  }

  std::uint64_t raw() { return eng_(); }

private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bstab
