#include "rgqr/quantile_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rgqr {

namespace {

// Variable indexing for the smallest-index rule: u_i -> 2i, v_i -> 2i+1.
constexpr double kRcTol = 1e-9;    // dual feasibility tolerance
constexpr double kPivTol = 1e-11;  // direction rate considered zero

}  // namespace

QrSolution solve_qr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    double tau) {
  const auto n = static_cast<int>(X.rows());
  const auto p = static_cast<int>(X.cols());
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("solve_qr: tau must lie in (0,1)");
  }
  if (y.size() != n) throw AlignmentError("solve_qr: X rows != y length");
  if (n < 5 || n <= p) {
    throw InsufficientDataError("solve_qr: need at least max(5, p+1) rows");
  }

  // Pivoted elimination both detects rank deficiency and selects p
  // independent rows for the starting vertex.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X.transpose());
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    throw SingularDesignError("solve_qr: design is rank deficient (rank " +
                              std::to_string(qr.rank()) + " < " +
                              std::to_string(p) + ")");
  }

  std::vector<int> basis(p);
  std::vector<char> in_basis(n, 0);
  {
    const auto perm = qr.colsPermutation().indices();
    for (int j = 0; j < p; ++j) {
      basis[j] = perm[j];
      in_basis[basis[j]] = 1;
    }
  }

  // side[i]: +1 when the positive-part variable of row i is basic, -1 for
  // the negative part. Only meaningful for rows outside the vertex set.
  std::vector<int> side(n, +1);

  Eigen::MatrixXd B(p, p);
  Eigen::VectorXd yb(p);
  Eigen::VectorXd beta(p);
  Eigen::VectorXd resid(n);

  auto refactor = [&]() {
    for (int j = 0; j < p; ++j) {
      B.row(j) = X.row(basis[j]);
      yb[j] = y[basis[j]];
    }
    beta = B.partialPivLu().solve(yb);
    resid = y - X * beta;
    for (int j = 0; j < p; ++j) resid[basis[j]] = 0.0;
  };
  refactor();
  for (int i = 0; i < n; ++i) {
    if (!in_basis[i]) side[i] = resid[i] >= 0.0 ? +1 : -1;
  }

  const long max_pivots = 200L * n + 10000L;
  long pivots = 0;
  Eigen::VectorXd dual_rhs(p);
  Eigen::VectorXd pi(p);
  Eigen::VectorXd dir_rhs(p);
  Eigen::VectorXd dir(p);
  std::vector<double> ratio(n);

  for (;; ++pivots) {
    if (pivots > max_pivots) {
      throw OptimError("solve_qr: pivot limit exceeded");
    }

    dual_rhs.setZero();
    for (int i = 0; i < n; ++i) {
      if (in_basis[i]) continue;
      const double psi = tau - (side[i] < 0 ? 1.0 : 0.0);
      dual_rhs.noalias() -= psi * X.row(i).transpose();
    }
    pi = B.transpose().partialPivLu().solve(dual_rhs);

    // Entering variable: smallest index with negative reduced cost.
    int enter_pos = -1;
    int enter_sign = 0;
    long enter_var = std::numeric_limits<long>::max();
    for (int j = 0; j < p; ++j) {
      const double rc_u = tau - pi[j];
      const double rc_v = (1.0 - tau) + pi[j];
      const long k = basis[j];
      if (rc_u < -kRcTol && 2L * k < enter_var) {
        enter_var = 2L * k;
        enter_pos = j;
        enter_sign = +1;
      }
      if (rc_v < -kRcTol && 2L * k + 1 < enter_var) {
        enter_var = 2L * k + 1;
        enter_pos = j;
        enter_sign = -1;
      }
    }
    if (enter_pos < 0) break;  // dual feasible: optimal vertex

    dir_rhs.setZero();
    dir_rhs[enter_pos] = -static_cast<double>(enter_sign);
    dir = B.partialPivLu().solve(dir_rhs);

    // Ratio test over rows outside the vertex set: find the smallest step
    // at which a basic residual part hits zero, then break near-ties by
    // the smallest variable index.
    ratio.assign(n, std::numeric_limits<double>::infinity());
    double t_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (in_basis[i]) continue;
      const double rate = X.row(i).dot(dir);
      if (side[i] > 0) {
        if (rate <= kPivTol) continue;
        ratio[i] = std::max(resid[i], 0.0) / rate;
      } else {
        if (rate >= -kPivTol) continue;
        ratio[i] = std::min(resid[i], 0.0) / rate;
      }
      t_min = std::min(t_min, ratio[i]);
    }
    if (!std::isfinite(t_min)) {
      throw OptimError("solve_qr: unblocked descent direction");
    }
    int leave_row = -1;
    long leave_var = std::numeric_limits<long>::max();
    const double slack = 1e-12 * (1.0 + std::fabs(t_min));
    for (int i = 0; i < n; ++i) {
      if (ratio[i] > t_min + slack) continue;
      const long var = 2L * i + (side[i] > 0 ? 0 : 1);
      if (var < leave_var) {
        leave_var = var;
        leave_row = i;
      }
    }

    const int old_row = basis[enter_pos];
    in_basis[old_row] = 0;
    side[old_row] = enter_sign;
    basis[enter_pos] = leave_row;
    in_basis[leave_row] = 1;
    refactor();
  }

  QrSolution sol;
  sol.beta = beta;
  sol.iterations = static_cast<int>(pivots);
  sol.basis = basis;
  std::sort(sol.basis.begin(), sol.basis.end());
  const double ztol = 1e-9 * (1.0 + y.cwiseAbs().maxCoeff());
  double obj = 0.0;
  int neg = 0;
  for (int i = 0; i < n; ++i) {
    obj += check_loss(tau, resid[i]);
    if (resid[i] < -ztol) ++neg;
  }
  sol.objective = obj;
  sol.negative_residuals = neg;
  return sol;
}

QrData rg_design(std::span<const DailyObservation> obs,
                 const Eigen::VectorXd& h) {
  const auto n = static_cast<long>(obs.size());
  if (h.size() != n) throw AlignmentError("rg_design: h length != obs length");
  if (n < 2) throw InsufficientDataError("rg_design: need >= 2 days");
  QrData d;
  d.X.resize(n - 1, 4);
  d.y.resize(n - 1);
  for (long i = 1; i < n; ++i) {
    const auto& prev = obs[static_cast<std::size_t>(i - 1)];
    d.X(i - 1, 0) = 1.0;
    d.X(i - 1, 1) = h[i - 1];
    d.X(i - 1, 2) = std::sqrt(prev.rv);
    d.X(i - 1, 3) = std::sqrt(prev.ov);
    d.y[i - 1] = obs[static_cast<std::size_t>(i)].y;
  }
  return d;
}

QrData rr_design(std::span<const DailyObservation> obs,
                 const Eigen::VectorXd& h, double tau) {
  QrData d = rg_design(obs, h);
  const auto n = static_cast<long>(obs.size());
  for (long i = 1; i < n; ++i) {
    d.X(i - 1, 2) = rq_at(obs[static_cast<std::size_t>(i - 1)], tau);
  }
  return d;
}

namespace {

QuantileCoeffs coeffs_from(const Eigen::VectorXd& beta, double tau) {
  QuantileCoeffs c;
  c.tau = tau;
  c.omega_tau = beta[0];
  c.gamma_tau = beta[1];
  c.alpha_tau = beta[2];
  c.beta_tau = beta[3];
  return c;
}

}  // namespace

QuantileCoeffs fit_rg(std::span<const DailyObservation> obs,
                      const GarchParams& params, double tau) {
  const VolFilterState state = filter_h(params, obs, default_h1(obs));
  const QrData d = rg_design(obs, state.h);
  return coeffs_from(solve_qr(d.X, d.y, tau).beta, tau);
}

QuantileCoeffs fit_rr(std::span<const DailyObservation> obs,
                      const GarchParams& params, double tau) {
  const VolFilterState state = filter_h(params, obs, default_h1(obs));
  const QrData d = rr_design(obs, state.h, tau);
  return coeffs_from(solve_qr(d.X, d.y, tau).beta, tau);
}

double forecast_quantile(const QuantileCoeffs& coeffs, double h_n, double x_n,
                         double ov_n) {
  if (!(h_n > 0.0) || !std::isfinite(h_n) || !std::isfinite(x_n) ||
      !std::isfinite(ov_n) || ov_n < 0.0) {
    throw DomainError("forecast_quantile: invalid inputs");
  }
  return coeffs.omega_tau + coeffs.gamma_tau * h_n + coeffs.alpha_tau * x_n +
         coeffs.beta_tau * std::sqrt(ov_n);
}

}  // namespace rgqr
