#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>

#include "rgqr/errors.hpp"
#include "rgqr/market_data.hpp"

namespace rgqr {

// First-step parameter vector (omega, gamma, alpha, beta) with the
// stationarity constraint gamma + alpha + beta < 1.
struct GarchParams {
  double omega = 1.0;
  double gamma = 0.1;
  double alpha = 0.5;
  double beta = 0.2;

  Eigen::Vector4d vec() const { return {omega, gamma, alpha, beta}; }

  void validate() const {
    if (!(omega > 0.0 && gamma > 0.0 && alpha > 0.0 && beta > 0.0)) {
      throw DomainError("GarchParams: all components must be positive");
    }
    if (!(gamma + alpha + beta < 1.0)) {
      throw DomainError("GarchParams: gamma + alpha + beta must be < 1");
    }
  }
};

// Componentwise bounds for (omega, gamma, alpha, beta).
struct ParamBox {
  Eigen::Vector4d lo{1e-6, 1e-6, 1e-6, 1e-6};
  Eigen::Vector4d hi{10.0, 0.999, 0.999, 0.999};

  static ParamBox defaults() { return {}; }

  void validate() const {
    for (int j = 0; j < 4; ++j) {
      if (!(lo[j] > 0.0 && lo[j] < hi[j])) {
        throw DomainError("ParamBox: require 0 < lo < hi componentwise");
      }
    }
    if (!(lo[1] + lo[2] + lo[3] < 1.0 - 1e-6)) {
      throw DomainError(
          "ParamBox: loading lower bounds leave no room under the simplex "
          "constraint");
    }
  }
};

// Filtered conditional standard deviations h_i and the initial value used.
struct VolFilterState {
  Eigen::VectorXd h;
  double h1 = 0.0;
};

template <typename Scalar>
Scalar garch_step(Scalar omega, Scalar gamma, Scalar alpha, Scalar beta,
                  Scalar h_prev, Scalar rv_prev, Scalar ov_prev) {
  using std::sqrt;
  return omega + gamma * h_prev + alpha * sqrt(rv_prev) +
         beta * sqrt(ov_prev);
}

inline double garch_step(const GarchParams& p, double h_prev, double rv_prev,
                         double ov_prev) {
  return garch_step(p.omega, p.gamma, p.alpha, p.beta, h_prev, rv_prev,
                    ov_prev);
}

// h_1 = h1, h_i = omega + gamma h_{i-1} + alpha sqrt(rv_{i-1})
//             + beta sqrt(ov_{i-1}).
inline VolFilterState filter_h(const GarchParams& params,
                               std::span<const DailyObservation> obs,
                               double h1) {
  params.validate();
  if (obs.empty()) throw InsufficientDataError("filter_h: no observations");
  if (!(h1 > 0.0)) throw DomainError("filter_h: h1 must be positive");
  VolFilterState state;
  state.h1 = h1;
  state.h.resize(static_cast<Eigen::Index>(obs.size()));
  state.h[0] = h1;
  for (std::size_t i = 1; i < obs.size(); ++i) {
    state.h[static_cast<Eigen::Index>(i)] =
        garch_step(params, state.h[static_cast<Eigen::Index>(i - 1)],
                   obs[i - 1].rv, obs[i - 1].ov);
  }
  return state;
}

// Default initial value: sqrt of the mean volatility proxy rv + ov.
inline double default_h1(std::span<const DailyObservation> obs) {
  if (obs.empty()) throw InsufficientDataError("default_h1: no observations");
  double mean = 0.0;
  for (const auto& o : obs) mean += o.rv + o.ov;
  mean /= static_cast<double>(obs.size());
  return std::sqrt(std::max(mean, 1e-12));
}

// Quasi-log-likelihood -(1/n) sum log h_i^2 + (rv_i + ov_i)/h_i^2 with the
// proxy floored at 1e-12 so all-zero days stay finite.
inline double qmle_objective(const GarchParams& params,
                             std::span<const DailyObservation> obs,
                             double h1) {
  const VolFilterState state = filter_h(params, obs, h1);
  double acc = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double h2 = state.h[static_cast<Eigen::Index>(i)] *
                      state.h[static_cast<Eigen::Index>(i)];
    const double proxy = std::max(obs[i].rv + obs[i].ov, 1e-12);
    acc += std::log(h2) + proxy / h2;
  }
  return -acc / static_cast<double>(obs.size());
}

// One-step-ahead conditional standard deviation.
inline double forecast_h(const GarchParams& params,
                         const VolFilterState& state,
                         const DailyObservation& last) {
  params.validate();
  if (state.h.size() == 0) throw DomainError("forecast_h: empty state");
  return garch_step(params, state.h[state.h.size() - 1], last.rv, last.ov);
}

}  // namespace rgqr
