#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace rgqr {

struct NmOptions {
  int max_iter = 2000;
  double ftol = 1e-10;
  double step = 0.5;  // initial simplex edge per coordinate
};

struct NmResult {
  Eigen::VectorXd x;
  double fmin = 0.0;
  int iterations = 0;
  long evals = 0;
  bool converged = false;
};

// Nelder-Mead downhill simplex, standard reflection/expansion/contraction
// coefficients, stopping when the simplex objective spread drops below
// ftol or max_iter is reached. Deterministic for a fixed start.
template <typename F>
NmResult nelder_mead(F&& f, const Eigen::VectorXd& x0,
                     const NmOptions& opt = {}) {
  const int n = static_cast<int>(x0.size());
  NmResult res;
  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (int j = 0; j < n; ++j) pts[j + 1][j] += opt.step;
  for (int j = 0; j <= n; ++j) {
    fv[j] = f(pts[j]);
    ++res.evals;
  }

  std::vector<int> order(n + 1);
  std::iota(order.begin(), order.end(), 0);
  auto reorder = [&]() {
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return fv[a] < fv[b]; });
  };

  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    reorder();
    const int best = order[0];
    const int worst = order[n];
    const int second = order[n - 1];
    if (std::fabs(fv[worst] - fv[best]) < opt.ftol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int j = 0; j <= n; ++j) {
      if (j != worst) centroid += pts[j];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    ++res.evals;
    if (fr < fv[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      ++res.evals;
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    // contraction
    const bool outside = fr < fv[worst];
    const Eigen::VectorXd& towards = outside ? xr : pts[worst];
    const Eigen::VectorXd xc = centroid + 0.5 * (towards - centroid);
    const double fc = f(xc);
    ++res.evals;
    if (fc < std::min(fr, fv[worst])) {
      pts[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (int j = 0; j <= n; ++j) {
      if (j == order[0]) continue;
      pts[j] = pts[order[0]] + 0.5 * (pts[j] - pts[order[0]]);
      fv[j] = f(pts[j]);
      ++res.evals;
    }
  }

  reorder();
  res.x = pts[order[0]];
  res.fmin = fv[order[0]];
  return res;
}

}  // namespace rgqr
