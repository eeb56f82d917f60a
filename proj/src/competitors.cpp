#include "rgqr/competitors.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "rgqr/nelder_mead.hpp"
#include "rgqr/quantile_regression.hpp"
#include "rgqr/rng.hpp"

namespace rgqr {

namespace {

constexpr int kRcaviarBurnIn = 50;

QgarchParams qgarch_from_unconstrained(const Eigen::Vector3d& z) {
  QgarchParams p;
  p.omega = log_box_map(z[0], 1e-6, 10.0);
  Eigen::Vector2d lo{1e-6, 1e-6};
  Eigen::Vector2d hi{0.999, 0.999};
  const Eigen::VectorXd loadings =
      loadings_from_sticks(z.tail<2>(), lo, hi, 1.0 - 1e-6);
  p.gamma = loadings[0];
  p.alpha = loadings[1];
  return p;
}

}  // namespace

QgarchFit fit_qgarch(std::span<const double> y, double tau,
                     std::uint64_t seed) {
  const auto n = static_cast<long>(y.size());
  if (n < 100) {
    throw InsufficientDataError("fit_qgarch: need >= 100 returns");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("fit_qgarch: tau must lie in (0,1)");
  }

  Eigen::VectorXd abs_y(n);
  Eigen::VectorXd y2(n);
  double mean_sq = 0.0;
  for (long i = 0; i < n; ++i) {
    abs_y[i] = std::fabs(y[static_cast<std::size_t>(i)]);
    y2[i] = std::max(abs_y[i] * abs_y[i], 1e-12);
    mean_sq += abs_y[i] * abs_y[i];
  }
  mean_sq /= static_cast<double>(n);
  const double h1 = std::sqrt(std::max(mean_sq, 1e-12));

  auto neg_objective = [&](const Eigen::VectorXd& z) {
    const QgarchParams p = qgarch_from_unconstrained(z);
    double h = h1;
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
      const double h2 = h * h;
      acc += std::log(h2) + y2[i] / h2;
      h = p.omega + p.gamma * h + p.alpha * abs_y[i];
    }
    return acc / static_cast<double>(n);
  };

  constexpr int kStarts = 8;
  FitReport report;
  report.starts = kStarts;
  report.h1 = h1;
  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (int s = 0; s < kStarts; ++s) {
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(3);
    if (s > 0) {
      Rng rng(split_seed(seed, 2000 + static_cast<std::uint64_t>(s)));
      for (int j = 0; j < 3; ++j) z0[j] = rng.uniform(-2.0, 2.0);
    }
    const double f0 = neg_objective(z0);
    report.start_initial.push_back(-f0);
    if (!std::isfinite(f0)) {
      report.start_final.push_back(-f0);
      continue;
    }
    const NmResult nm = nelder_mead(neg_objective, z0);
    report.total_evals += nm.evals;
    report.start_final.push_back(-nm.fmin);
    if (nm.fmin < best_val) {
      best_val = nm.fmin;
      best_x = nm.x;
      report.best_start = s;
      report.best_iterations = nm.iterations;
      report.converged = nm.converged;
    }
  }
  if (!std::isfinite(best_val)) {
    throw OptimError("fit_qgarch: no start produced a finite objective");
  }

  QgarchFit fit;
  fit.vol = qgarch_from_unconstrained(best_x);
  fit.tau = tau;
  fit.objective = -best_val;
  report.objective = fit.objective;
  fit.report = report;

  // Step two: quantile regression on the filtered path.
  Eigen::VectorXd h(n);
  h[0] = h1;
  for (long i = 1; i < n; ++i) {
    h[i] = fit.vol.omega + fit.vol.gamma * h[i - 1] +
           fit.vol.alpha * abs_y[i - 1];
  }
  Eigen::MatrixXd X(n - 1, 3);
  Eigen::VectorXd resp(n - 1);
  for (long i = 1; i < n; ++i) {
    X(i - 1, 0) = 1.0;
    X(i - 1, 1) = h[i - 1];
    X(i - 1, 2) = abs_y[i - 1];
    resp[i - 1] = y[static_cast<std::size_t>(i)];
  }
  const QrSolution qr = solve_qr(X, resp, tau);
  fit.coeffs = qr.beta;
  fit.h_last = h[n - 1];
  return fit;
}

RcaviarFit fit_rcaviar(std::span<const DailyObservation> obs, double tau,
                       std::uint64_t seed) {
  const auto n = static_cast<long>(obs.size());
  if (n < 100) {
    throw InsufficientDataError("fit_rcaviar: need >= 100 observations");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("fit_rcaviar: tau must lie in (0,1)");
  }

  std::vector<double> y(static_cast<std::size_t>(n));
  Eigen::VectorXd sqrt_rv(n);
  Eigen::VectorXd abs_y(n);
  for (long i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = obs[static_cast<std::size_t>(i)].y;
    sqrt_rv[i] = std::sqrt(obs[static_cast<std::size_t>(i)].rv);
    abs_y[i] = std::fabs(obs[static_cast<std::size_t>(i)].y);
  }
  const double q1 = empirical_quantile(
      std::vector<double>(y.begin(), y.begin() + kRcaviarBurnIn), tau);
  const double q_all = empirical_quantile(y, tau);

  auto params_from = [](const Eigen::Vector4d& z) {
    CaviarParams p;
    p.omega = z[0];
    p.gamma = 0.999 * std::tanh(z[1]);
    p.alpha = z[2];
    p.beta = z[3];
    return p;
  };

  auto objective = [&](const Eigen::VectorXd& z) {
    const CaviarParams p = params_from(z);
    double q = q1;
    double acc = 0.0;
    for (long i = 1; i < n; ++i) {
      q = p.omega + p.gamma * q + p.alpha * sqrt_rv[i - 1] +
          p.beta * abs_y[i - 1];
      if (i >= kRcaviarBurnIn) {
        acc += check_loss(tau, y[static_cast<std::size_t>(i)] - q);
      }
    }
    return acc;
  };

  constexpr int kStarts = 10;
  FitReport report;
  report.starts = kStarts;
  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (int s = 0; s < kStarts; ++s) {
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(4);
    if (s > 0) {
      // Start box keyed to the sample quantile scale: negative intercept
      // and loadings, nonnegative persistence.
      Rng rng(split_seed(seed, 3000 + static_cast<std::uint64_t>(s)));
      z0[0] = rng.uniform(-2.0 * std::fabs(q_all), 0.0);
      z0[1] = std::atanh(rng.uniform(0.0, 0.9) / 0.999);
      z0[2] = rng.uniform(-2.0, 0.0);
      z0[3] = rng.uniform(-2.0, 0.0);
    }
    const double f0 = objective(z0);
    report.start_initial.push_back(f0);
    if (!std::isfinite(f0)) {
      report.start_final.push_back(f0);
      continue;
    }
    const NmResult nm = nelder_mead(objective, z0);
    report.total_evals += nm.evals;
    report.start_final.push_back(nm.fmin);
    if (nm.fmin < best_val) {
      best_val = nm.fmin;
      best_x = nm.x;
      report.best_start = s;
      report.best_iterations = nm.iterations;
      report.converged = nm.converged;
    }
  }
  if (!std::isfinite(best_val)) {
    throw OptimError("fit_rcaviar: no start produced a finite objective");
  }

  RcaviarFit fit;
  fit.params = params_from(best_x);
  fit.params.validate();
  fit.tau = tau;
  fit.objective = best_val;
  report.objective = best_val;
  fit.report = report;
  double q = q1;
  for (long i = 1; i < n; ++i) {
    q = fit.params.omega + fit.params.gamma * q +
        fit.params.alpha * sqrt_rv[i - 1] + fit.params.beta * abs_y[i - 1];
  }
  fit.q_last = q;
  return fit;
}

double sample_quantile_forecast(std::span<const double> window, double tau) {
  if (window.size() < 20) {
    throw InsufficientDataError(
        "sample_quantile_forecast: need a window of >= 20 returns");
  }
  return empirical_quantile(std::vector<double>(window.begin(), window.end()),
                            tau);
}

}  // namespace rgqr
