#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "rgqr/errors.hpp"
#include "rgqr/market_data.hpp"
#include "rgqr/vol_filter.hpp"

namespace rgqr {

// Check loss rho_tau(x) = x (tau - 1{x < 0}).
template <typename Scalar>
Scalar check_loss(Scalar tau, Scalar r) {
  return r * (tau - (r < Scalar(0) ? Scalar(1) : Scalar(0)));
}

// Second-step coefficient vector for one quantile level.
struct QuantileCoeffs {
  double tau = 0.05;
  double omega_tau = 0.0;
  double gamma_tau = 0.0;
  double alpha_tau = 0.0;
  double beta_tau = 0.0;

  Eigen::Vector4d vec() const {
    return {omega_tau, gamma_tau, alpha_tau, beta_tau};
  }
};

struct QrSolution {
  Eigen::VectorXd beta;
  double objective = 0.0;
  int iterations = 0;
  std::vector<int> basis;      // rows interpolated exactly at the vertex
  int negative_residuals = 0;  // strictly negative residual count
};

// Exact minimizer of sum_i rho_tau(y_i - x_i' beta): dense primal simplex
// on the split-residual LP, smallest-index pivoting on ties.
QrSolution solve_qr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    double tau);

struct QrData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

// Design rows i = 2..n: (1, h_{i-1}, sqrt(rv_{i-1}), sqrt(ov_{i-1})).
QrData rg_design(std::span<const DailyObservation> obs,
                 const Eigen::VectorXd& h);
// Same with the lagged realized quantile as the third regressor.
QrData rr_design(std::span<const DailyObservation> obs,
                 const Eigen::VectorXd& h, double tau);

QuantileCoeffs fit_rg(std::span<const DailyObservation> obs,
                      const GarchParams& params, double tau);
QuantileCoeffs fit_rr(std::span<const DailyObservation> obs,
                      const GarchParams& params, double tau);

// omega + gamma h_n + alpha x_n + beta sqrt(ov_n), x_n = sqrt(rv_n) for the
// RG design or the day-n realized quantile for the RR design.
double forecast_quantile(const QuantileCoeffs& coeffs, double h_n, double x_n,
                         double ov_n);

}  // namespace rgqr
