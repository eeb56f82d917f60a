#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "rgqr/market_data.hpp"
#include "rgqr/qmle.hpp"
#include "rgqr/realized_measures.hpp"

namespace rgqr {

// GARCH(1,1)-type step-one parameters with |y| innovations.
struct QgarchParams {
  double omega = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
};

struct QgarchFit {
  QgarchParams vol;
  double tau = 0.0;
  Eigen::Vector3d coeffs = Eigen::Vector3d::Zero();  // step-two QR
  double h_last = 0.0;
  double objective = 0.0;
  FitReport report;

  // One-step-ahead VaR from the fitted linear map.
  double forecast(double y_last) const {
    return coeffs[0] + coeffs[1] * h_last + coeffs[2] * std::fabs(y_last);
  }
};

// Two-step low-frequency baseline: Gaussian QMLE on squared returns with
// h_i = omega + gamma h_{i-1} + alpha |y_{i-1}|, then quantile regression
// on (1, h_{i-1}, |y_{i-1}|).
QgarchFit fit_qgarch(std::span<const double> y, double tau,
                     std::uint64_t seed = 0);

// Conditional-autoregressive VaR recursion coefficients.
struct CaviarParams {
  double omega = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  void validate() const {
    if (!(std::fabs(gamma) < 1.0)) {
      throw DomainError("CaviarParams: |gamma| must be < 1");
    }
  }
};

struct RcaviarFit {
  CaviarParams params;
  double tau = 0.0;
  double q_last = 0.0;  // recursion value at the last sample day
  double objective = 0.0;
  FitReport report;

  double forecast(double rv_last, double y_last) const {
    return params.omega + params.gamma * q_last +
           params.alpha * std::sqrt(rv_last) +
           params.beta * std::fabs(y_last);
  }
};

// Minimizes the check loss of Q_i = omega + gamma Q_{i-1}
// + alpha sqrt(rv_{i-1}) + beta |y_{i-1}| over the recursion coefficients;
// Q_1 is the empirical tau-quantile of the first 50 returns and the first
// 50 days are excluded from the objective as burn-in.
RcaviarFit fit_rcaviar(std::span<const DailyObservation> obs, double tau,
                       std::uint64_t seed);

// Empirical tau-quantile of a trailing window of returns.
double sample_quantile_forecast(std::span<const double> window, double tau);

}  // namespace rgqr
