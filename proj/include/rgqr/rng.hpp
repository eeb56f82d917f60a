#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rgqr {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed-splitting rule used everywhere: stream k of a run with master seed s
// is seeded with split_seed(s, k). Keeps partial re-runs reproducible.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t task) {
  return splitmix64(master + task);
}

// mt19937_64 bit stream with explicit scalar transforms, so draws depend
// only on the engine (whose output is pinned by the standard) and not on
// the library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform strictly inside (0,1); never returns 0, safe under log().
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = kTwoPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Gamma(shape, scale 1), Marsaglia-Tsang squeeze; shape < 1 boosted.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Inversion by sequential search; fine for the small means used here.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double p = uniform();
    while (p > limit) {
      p *= uniform();
      ++k;
    }
    return k;
  }

  // Noncentral chi-squared as the Poisson mixture of central chi-squares:
  // J ~ Poisson(nc/2), then chi^2_{df + 2J} = 2 Gamma((df + 2J)/2).
  double noncentral_chisq(double df, double noncentrality) {
    const int j = poisson(0.5 * noncentrality);
    const double shape = 0.5 * df + static_cast<double>(j);
    if (shape <= 0.0) return 0.0;
    return 2.0 * gamma(shape);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rgqr
