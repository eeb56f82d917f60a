#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "rgqr/errors.hpp"
#include "rgqr/market_data.hpp"

namespace rgqr {

struct RealizedQuantileSpec {
  double tau = 0.05;
  double scale_exponent = 0.5;  // self-similarity exponent H

  void validate() const {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw DomainError("RealizedQuantileSpec: tau must lie in (0,1)");
    }
    if (!(scale_exponent > 0.0 && scale_exponent < 1.0)) {
      throw DomainError("RealizedQuantileSpec: H must lie in (0,1)");
    }
  }
};

inline Eigen::VectorXd increments(const IntradayDay& day) {
  const int m = day.increments();
  Eigen::VectorXd dx(m);
  for (int i = 0; i < m; ++i) {
    dx[i] = day.log_prices[i + 1] - day.log_prices[i];
  }
  return dx;
}

// Order statistic at rank ceil(tau*m): the lower sample quantile, which is
// an exact check-loss minimizer; ties resolve toward the smaller value.
// The rank is computed with a small slack so tau*m landing on an integer
// up to floating error is treated as that integer.
template <typename Scalar>
Scalar empirical_quantile_sorted(const std::vector<Scalar>& sorted,
                                 double tau) {
  const auto m = static_cast<long>(sorted.size());
  if (m < 1) throw InsufficientDataError("empirical quantile: empty sample");
  const double t = tau * static_cast<double>(m);
  auto k = static_cast<long>(std::ceil(t - 1e-9 * std::max(1.0, t)));
  k = std::clamp(k, 1L, m);
  return sorted[static_cast<std::size_t>(k - 1)];
}

template <typename Scalar>
Scalar empirical_quantile(std::vector<Scalar> sample, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("empirical quantile: tau must lie in (0,1)");
  }
  const auto m = static_cast<long>(sample.size());
  if (m < 1) throw InsufficientDataError("empirical quantile: empty sample");
  const double t = tau * static_cast<double>(m);
  auto k = static_cast<long>(std::ceil(t - 1e-9 * std::max(1.0, t)));
  k = std::clamp(k, 1L, m);
  auto nth = sample.begin() + (k - 1);
  std::nth_element(sample.begin(), nth, sample.end());
  return *nth;
}

inline double empirical_quantile(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 double tau) {
  return empirical_quantile(
      std::vector<double>(x.data(), x.data() + x.size()), tau);
}

// Sum of squared intraday increments.
inline double realized_variance(const IntradayDay& day) {
  if (day.increments() < 1) {
    throw InsufficientDataError("realized_variance: need >= 1 increment");
  }
  double sum = 0.0;
  for (int i = 1; i < static_cast<int>(day.log_prices.size()); ++i) {
    const double dx = day.log_prices[i] - day.log_prices[i - 1];
    if (!std::isfinite(dx)) {
      throw NumericError("realized_variance: non-finite increment");
    }
    sum += dx * dx;
  }
  return sum;
}

// Empirical tau-quantile of the m intraday increments scaled by m^H, the
// 1/sqrt(dt) scale-up from tick spacing to the open-to-close horizon.
inline double realized_quantile(const IntradayDay& day,
                                const RealizedQuantileSpec& spec) {
  spec.validate();
  const int m = day.increments();
  if (m < 2) {
    throw InsufficientDataError("realized_quantile: need >= 2 increments");
  }
  const Eigen::VectorXd dx = increments(day);
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(dx[i])) {
      throw NumericError("realized_quantile: non-finite increment");
    }
  }
  const double q = empirical_quantile(dx, spec.tau);
  return q * std::pow(static_cast<double>(m), spec.scale_exponent);
}

}  // namespace rgqr
