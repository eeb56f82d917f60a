#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rgqr/rng.hpp"
#include "rgqr/stats.hpp"

using namespace rgqr;

TEST_CASE("chi2_sf matches closed forms for 1 and 2 degrees of freedom") {
  // df=1: Q(x) = erfc(sqrt(x/2)); df=2: Q(x) = exp(-x/2).
  for (double x : {0.01, 0.5, 1.0, 2.3, 3.84, 7.9, 15.0, 40.0}) {
    CHECK(chi2_sf(x, 1.0) ==
          doctest::Approx(std::erfc(std::sqrt(x / 2.0))).epsilon(1e-11));
    CHECK(chi2_sf(x, 2.0) ==
          doctest::Approx(std::exp(-x / 2.0)).epsilon(1e-12));
  }
  CHECK(chi2_sf(1.0, 1.0) == doctest::Approx(0.3173105078629141).epsilon(1e-11));
  CHECK(chi2_sf(3.8414588206941259, 1.0) == doctest::Approx(0.05).epsilon(1e-10));
}

TEST_CASE("chi2_sf boundary and monotonicity") {
  CHECK(chi2_sf(0.0, 4.0) == 1.0);
  CHECK(chi2_sf(-3.0, 4.0) == 1.0);
  double prev = 1.0;
  for (double x = 0.5; x < 30.0; x += 0.5) {
    const double v = chi2_sf(x, 6.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(chi2_sf(1.0, 0.0), DomainError);
}

TEST_CASE("normal quantile inverts the normal cdf") {
  CHECK(normal_quantile(0.05) ==
        doctest::Approx(-1.6448536269514727).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  for (double p : {1e-6, 0.01, 0.05, 0.1, 0.3, 0.7, 0.95, 0.999}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("rng streams are deterministic per seed") {
  Rng a(42);
  Rng b(42);
  Rng c(43);
  bool all_equal = true;
  bool any_differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.normal();
    all_equal = all_equal && (x == b.normal());
    any_differs = any_differs || (x != c.normal());
  }
  CHECK(all_equal);
  CHECK(any_differs);
  CHECK(split_seed(7, 1) != split_seed(7, 2));
  CHECK(split_seed(7, 1) == split_seed(7, 1));
}

TEST_CASE("rng moments") {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.0).scale(1.0).epsilon(0.01));
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));

  double gsum = 0.0;
  for (int i = 0; i < n; ++i) gsum += rng.gamma(2.5);
  CHECK(gsum / n == doctest::Approx(2.5).epsilon(0.02));

  // Small-shape gamma, the regime used by the volatility disturbance.
  double gsmall = 0.0;
  for (int i = 0; i < n; ++i) gsmall += rng.gamma(0.025);
  CHECK(gsmall / n == doctest::Approx(0.025).epsilon(0.05));

  long psum = 0;
  for (int i = 0; i < n; ++i) psum += rng.poisson(0.025);
  CHECK(static_cast<double>(psum) / n == doctest::Approx(0.025).epsilon(0.1));
}

TEST_CASE("noncentral chi-squared mixture has the configured mean") {
  Rng rng(7);
  const int n = 400000;
  double sum = 0.0, sum_sq = 0.0;
  bool nonneg = true;
  for (int i = 0; i < n; ++i) {
    const double v = rng.noncentral_chisq(0.05, 0.05);
    nonneg = nonneg && v >= 0.0;
    sum += v;
    sum_sq += v * v;
  }
  CHECK(nonneg);
  // mean df + nc = 0.1, variance 2 df + 4 nc = 0.3
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(mean == doctest::Approx(0.1).epsilon(0.03));
  CHECK(var == doctest::Approx(0.3).epsilon(0.15));
}

TEST_CASE("uniform stays inside the open interval") {
  Rng rng(1);
  bool ok = true;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ok = ok && u > 0.0 && u < 1.0;
  }
  CHECK(ok);
}
