#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rgqr/market_data.hpp"
#include "rgqr/vol_filter.hpp"

namespace rgqr {

struct FitReport {
  int starts = 0;
  int best_start = -1;
  int best_iterations = 0;
  bool converged = false;
  long total_evals = 0;
  double objective = 0.0;
  int floored_days = 0;
  double h1 = 0.0;
  std::vector<double> start_initial;
  std::vector<double> start_final;

  std::string to_text() const;
};

struct QmleFit {
  GarchParams params;
  double objective = 0.0;
  VolFilterState state;
  FitReport report;
};

// Map an unconstrained stick vector onto positive loadings whose sum stays
// strictly below cap, then clamp into [lo, hi] and, if clamping pushed the
// sum back over the cap, shrink affinely toward lo.
Eigen::VectorXd loadings_from_sticks(const Eigen::VectorXd& z,
                                     const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi, double cap);

// Logistic map of one unconstrained coordinate onto [lo, hi] on log scale.
double log_box_map(double z, double lo, double hi);

GarchParams garch_from_unconstrained(const Eigen::Vector4d& z,
                                     const ParamBox& box);

// Maximize the quasi-likelihood over the box by Nelder-Mead in the
// unconstrained parametrization, 8 deterministic seeded starts.
QmleFit fit_qmle(std::span<const DailyObservation> obs, const ParamBox& box,
                 std::uint64_t seed);

}  // namespace rgqr
