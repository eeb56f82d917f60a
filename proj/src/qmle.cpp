#include "rgqr/qmle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rgqr/errors.hpp"
#include "rgqr/nelder_mead.hpp"
#include "rgqr/rng.hpp"

namespace rgqr {

namespace {

constexpr double kSimplexCap = 1.0 - 1e-6;
constexpr double kStickTotal = 1.0 - 1e-5;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double log_box_map(double z, double lo, double hi) {
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  return std::exp(llo + sigmoid(z) * (lhi - llo));
}

Eigen::VectorXd loadings_from_sticks(const Eigen::VectorXd& z,
                                     const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi, double cap) {
  const int k = static_cast<int>(z.size());
  Eigen::VectorXd p(k);
  double remaining = kStickTotal;
  for (int j = 0; j < k; ++j) {
    const double u = sigmoid(z[j]);
    p[j] = remaining * u;
    remaining -= p[j];
  }
  for (int j = 0; j < k; ++j) p[j] = std::clamp(p[j], lo[j], hi[j]);
  const double sum = p.sum();
  if (sum >= cap) {
    const double base = lo.sum();
    const double t = (cap - base) * (1.0 - 1e-9) / (sum - base);
    for (int j = 0; j < k; ++j) p[j] = lo[j] + t * (p[j] - lo[j]);
  }
  return p;
}

GarchParams garch_from_unconstrained(const Eigen::Vector4d& z,
                                     const ParamBox& box) {
  GarchParams params;
  params.omega = log_box_map(z[0], box.lo[0], box.hi[0]);
  const Eigen::VectorXd loadings = loadings_from_sticks(
      z.tail<3>(), box.lo.tail<3>(), box.hi.tail<3>(), kSimplexCap);
  params.gamma = loadings[0];
  params.alpha = loadings[1];
  params.beta = loadings[2];
  return params;
}

std::string FitReport::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "starts=" << starts << "\n"
     << "best_start=" << best_start << "\n"
     << "best_iterations=" << best_iterations << "\n"
     << "converged=" << (converged ? 1 : 0) << "\n"
     << "total_evals=" << total_evals << "\n"
     << "objective=" << objective << "\n"
     << "floored_days=" << floored_days << "\n"
     << "h1=" << h1 << "\n";
  for (std::size_t s = 0; s < start_initial.size(); ++s) {
    os << "start_" << s << "_initial=" << start_initial[s] << "\n"
       << "start_" << s << "_final=" << start_final[s] << "\n";
  }
  return os.str();
}

QmleFit fit_qmle(std::span<const DailyObservation> obs, const ParamBox& box,
                 std::uint64_t seed) {
  box.validate();
  const auto n = static_cast<long>(obs.size());
  if (n < 50) {
    throw InsufficientDataError("fit_qmle: need >= 50 observations, got " +
                                std::to_string(n));
  }
  const double h1 = default_h1(obs);

  Eigen::VectorXd sqrt_rv(n);
  Eigen::VectorXd sqrt_ov(n);
  Eigen::VectorXd proxy(n);
  int floored = 0;
  for (long i = 0; i < n; ++i) {
    sqrt_rv[i] = std::sqrt(obs[static_cast<std::size_t>(i)].rv);
    sqrt_ov[i] = std::sqrt(obs[static_cast<std::size_t>(i)].ov);
    const double raw =
        obs[static_cast<std::size_t>(i)].rv + obs[static_cast<std::size_t>(i)].ov;
    proxy[i] = std::max(raw, 1e-12);
    if (raw < 1e-12) ++floored;
  }

  // Same recursion and summation order as qmle_objective, with the square
  // roots hoisted out of the optimizer loop.
  auto neg_objective = [&](const Eigen::VectorXd& z) {
    const GarchParams p = garch_from_unconstrained(z, box);
    double h = h1;
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
      const double h2 = h * h;
      acc += std::log(h2) + proxy[i] / h2;
      h = p.omega + p.gamma * h + p.alpha * sqrt_rv[i] + p.beta * sqrt_ov[i];
    }
    return acc / static_cast<double>(n);
  };

  constexpr int kStarts = 8;
  NmOptions opts;
  FitReport report;
  report.starts = kStarts;
  report.floored_days = floored;
  report.h1 = h1;

  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (int s = 0; s < kStarts; ++s) {
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(4);
    if (s > 0) {
      Rng rng(split_seed(seed, 1000 + static_cast<std::uint64_t>(s)));
      for (int j = 0; j < 4; ++j) z0[j] = rng.uniform(-2.0, 2.0);
    }
    const double f0 = neg_objective(z0);
    report.start_initial.push_back(-f0);
    if (!std::isfinite(f0)) {
      report.start_final.push_back(-f0);
      continue;
    }
    const NmResult nm = nelder_mead(neg_objective, z0, opts);
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
    throw OptimError("fit_qmle: no start produced a finite objective");
  }

  QmleFit fit;
  fit.params = garch_from_unconstrained(best_x, box);
  fit.params.validate();
  fit.objective = -best_val;
  fit.state = filter_h(fit.params, obs, h1);
  report.objective = fit.objective;
  fit.report = report;
  return fit;
}

}  // namespace rgqr
