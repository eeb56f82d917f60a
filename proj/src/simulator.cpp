#include "rgqr/simulator.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "rgqr/competitors.hpp"
#include "rgqr/detail/format.hpp"
#include "rgqr/qmle.hpp"
#include "rgqr/quantile_regression.hpp"
#include "rgqr/realized_measures.hpp"
#include "rgqr/rng.hpp"
#include "rgqr/stats.hpp"

namespace rgqr {

namespace {

// Stream indices under the documented split rule.
constexpr std::uint64_t kPanelStream = 0;
constexpr std::uint64_t kQuantileStream = 1;
constexpr std::uint64_t kRepStreamBase = 10;

double draw_d(Rng& rng, const DgpConfig& cfg) {
  if (cfg.d_df == 0.0 && cfg.d_nc == 0.0) return 0.0;  // diagnostic mode
  return rng.noncentral_chisq(cfg.d_df, cfg.d_nc) - 0.1;
}

}  // namespace

void DgpConfig::validate() const {
  params.validate();
  if (!(w > 0.0 && w < 1.0)) throw ConfigError("DgpConfig: w must be in (0,1)");
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ConfigError("DgpConfig: lambda must be in (0,1)");
  }
  if (n < 2) throw ConfigError("DgpConfig: n must be >= 2");
  if (m < 2) throw ConfigError("DgpConfig: m must be >= 2");
  if (burn_in < 0) throw ConfigError("DgpConfig: burn_in must be >= 0");
  if (d_df < 0.0 || d_nc < 0.0) {
    throw ConfigError("DgpConfig: d_df and d_nc must be nonnegative");
  }
  const double sum = d_df + d_nc;
  // Either the mean-0.1 disturbance of the model or the degenerate d = 0
  // diagnostic mode.
  if (!(std::fabs(sum - 0.1) < 1e-9 || sum == 0.0)) {
    throw ConfigError("DgpConfig: d_df + d_nc must equal 0.1 (or 0 for the "
                      "degenerate mode)");
  }
}

SimulatedPanel simulate_panel(const DgpConfig& cfg) {
  cfg.validate();
  Rng rng(split_seed(cfg.seed, kPanelStream));

  const int total = cfg.burn_in + cfg.n;
  const double denom = 1.0 - cfg.params.gamma - cfg.params.alpha -
                       cfg.params.beta;
  double h = cfg.params.omega / denom;
  double x = cfg.x0;
  double close_prev = cfg.x0;

  SimulatedPanel out;
  out.days.reserve(static_cast<std::size_t>(cfg.n));
  out.truth.h.reserve(static_cast<std::size_t>(cfg.n));

  const double inv_m = 1.0 / static_cast<double>(cfg.m);
  for (int i = 1; i <= total; ++i) {
    const double d = draw_d(rng, cfg);
    const double daily_var = h * h * (1.0 + d);

    const double step_sd_night = std::sqrt((1.0 - cfg.w) * daily_var * inv_m);
    for (int k = 0; k < cfg.m; ++k) x += step_sd_night * rng.normal();
    const double open = x;
    const double gap = open - close_prev;
    const double ov = gap * gap;

    std::vector<double> prices;
    prices.reserve(static_cast<std::size_t>(cfg.m) + 1);
    prices.push_back(open);
    const double step_sd_sess = std::sqrt(cfg.w * daily_var * inv_m);
    for (int k = 0; k < cfg.m; ++k) {
      x += step_sd_sess * rng.normal();
      prices.push_back(x);
    }
    const double iv = cfg.w * daily_var;

    if (i > cfg.burn_in) {
      IntradayDay day;
      day.day_index = i - cfg.burn_in;
      day.log_prices = std::move(prices);
      day.close_prev = close_prev;
      out.days.push_back(std::move(day));
      out.truth.h.push_back(h);
      out.truth.iv.push_back(iv);
      out.truth.d.push_back(d);
      out.truth.ov.push_back(ov);
    }

    h = garch_step(cfg.params, h, iv, ov);
    close_prev = x;
  }
  out.truth.h_next = h;
  return out;
}

MonteCarloQuantile monte_carlo_true_quantile(const DgpConfig& cfg, double tau,
                                             long reps) {
  cfg.validate();
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("monte_carlo_true_quantile: tau must lie in (0,1)");
  }
  if (reps < 100000) {
    throw DomainError("monte_carlo_true_quantile: need reps >= 1e5");
  }
  Rng rng(split_seed(cfg.seed, kQuantileStream));
  std::vector<double> draws(static_cast<std::size_t>(reps));
  for (auto& v : draws) {
    const double d = draw_d(rng, cfg);
    v = rng.normal() * std::sqrt(1.0 + d);
  }
  MonteCarloQuantile res;
  res.reps = reps;
  res.q = empirical_quantile(draws, tau);
  // Density at the quantile from a symmetric difference of order
  // statistics; feeds the usual asymptotic standard error.
  const double delta =
      std::min({0.5 * tau, 0.5 * (1.0 - tau),
                std::max(0.005, 2.0 / std::sqrt(static_cast<double>(reps)))});
  const double q_hi = empirical_quantile(draws, tau + delta);
  const double q_lo = empirical_quantile(draws, tau - delta);
  const double spread = std::max(q_hi - q_lo, 1e-12);
  const double density = 2.0 * delta / spread;
  res.se = std::sqrt(tau * (1.0 - tau) / static_cast<double>(reps)) / density;
  return res;
}

ReplicationResult run_replication(const DgpConfig& cfg,
                                  const std::vector<double>& taus,
                                  const std::vector<ModelKind>& models,
                                  const std::vector<double>& q_taus,
                                  const ParamBox& box) {
  if (q_taus.size() != taus.size()) {
    throw AlignmentError("run_replication: q_taus must align with taus");
  }
  const auto nt = taus.size();
  ReplicationResult rep;
  rep.rg_ok.assign(nt, false);
  rep.rr_ok.assign(nt, false);
  rep.qgarch_ok.assign(nt, false);
  rep.rcaviar_ok.assign(nt, false);
  rep.sq_ok.assign(nt, false);
  rep.rg_abs.assign(nt, Eigen::Vector4d::Zero());
  rep.rr_abs.assign(nt, Eigen::Vector4d::Zero());
  rep.rg_fc_abs.assign(nt, 0.0);
  rep.rr_fc_abs.assign(nt, 0.0);
  rep.qgarch_fc_abs.assign(nt, 0.0);
  rep.rcaviar_fc_abs.assign(nt, 0.0);
  rep.sq_fc_abs.assign(nt, 0.0);

  auto wants = [&](ModelKind k) {
    for (auto m : models) {
      if (m == k) return true;
    }
    return false;
  };

  const SimulatedPanel sim = simulate_panel(cfg);
  const std::vector<DailyObservation> obs =
      build_daily_observations(sim.days, taus);
  const DailyObservation& last = obs.back();
  std::vector<double> y;
  y.reserve(obs.size());
  for (const auto& o : obs) y.push_back(o.y);

  const bool need_first_step = wants(ModelKind::Rg) || wants(ModelKind::Rr);
  QmleFit qmle;
  if (need_first_step) {
    try {
      qmle = fit_qmle(obs, box, cfg.seed);
      rep.step1_ok = true;
      rep.step1_abs =
          (qmle.params.vec() - cfg.params.vec()).cwiseAbs();
    } catch (const std::exception&) {
      rep.step1_ok = false;
    }
  }

  for (std::size_t ti = 0; ti < nt; ++ti) {
    const double tau = taus[ti];
    const double q_tau = q_taus[ti];
    const double z_tau = normal_quantile(tau);
    const double target = sim.truth.h_next * q_tau;

    if (rep.step1_ok && wants(ModelKind::Rg)) {
      try {
        const QuantileCoeffs c = fit_rg(obs, qmle.params, tau);
        const Eigen::Vector4d truth = cfg.params.vec() * q_tau;
        rep.rg_abs[ti] = (c.vec() - truth).cwiseAbs();
        const double h_last = qmle.state.h[qmle.state.h.size() - 1];
        const double fc =
            forecast_quantile(c, h_last, std::sqrt(last.rv), last.ov);
        rep.rg_fc_abs[ti] = std::fabs(fc - target);
        rep.rg_ok[ti] = true;
      } catch (const std::exception&) {
      }
    }
    if (rep.step1_ok && wants(ModelKind::Rr)) {
      try {
        const QuantileCoeffs c = fit_rr(obs, qmle.params, tau);
        Eigen::Vector4d truth = cfg.params.vec() * q_tau;
        truth[2] = cfg.params.alpha * q_tau / z_tau;
        rep.rr_abs[ti] = (c.vec() - truth).cwiseAbs();
        const double h_last = qmle.state.h[qmle.state.h.size() - 1];
        const double fc =
            forecast_quantile(c, h_last, rq_at(last, tau), last.ov);
        rep.rr_fc_abs[ti] = std::fabs(fc - target);
        rep.rr_ok[ti] = true;
      } catch (const std::exception&) {
      }
    }
    if (wants(ModelKind::Qgarch)) {
      try {
        const QgarchFit fit = fit_qgarch(y, tau, cfg.seed);
        rep.qgarch_fc_abs[ti] = std::fabs(fit.forecast(last.y) - target);
        rep.qgarch_ok[ti] = true;
      } catch (const std::exception&) {
      }
    }
    if (wants(ModelKind::Rcaviar)) {
      try {
        const RcaviarFit fit = fit_rcaviar(obs, tau, cfg.seed);
        rep.rcaviar_fc_abs[ti] =
            std::fabs(fit.forecast(last.rv, last.y) - target);
        rep.rcaviar_ok[ti] = true;
      } catch (const std::exception&) {
      }
    }
    if (wants(ModelKind::Sq)) {
      try {
        const double fc = sample_quantile_forecast(y, tau);
        rep.sq_fc_abs[ti] = std::fabs(fc - target);
        rep.sq_ok[ti] = true;
      } catch (const std::exception&) {
      }
    }
  }
  return rep;
}

std::vector<MaeRow> mae_experiment(const DgpConfig& base, const MaeGrid& grid,
                                   int reps,
                                   const std::vector<ModelKind>& models,
                                   const ParamBox& box, int threads) {
  if (reps < 10) throw ConfigError("mae_experiment: need reps >= 10");
  if (grid.ns.empty() || grid.ms.empty() || grid.taus.empty()) {
    throw ConfigError("mae_experiment: empty grid");
  }

  std::vector<double> q_taus;
  q_taus.reserve(grid.taus.size());
  for (double tau : grid.taus) {
    q_taus.push_back(monte_carlo_true_quantile(base, tau, 1000000).q);
  }

  auto wants = [&](ModelKind k) {
    for (auto m : models) {
      if (m == k) return true;
    }
    return false;
  };
  const bool first_step = wants(ModelKind::Rg) || wants(ModelKind::Rr);

  std::vector<MaeRow> rows;
  static const char* kParamNames[4] = {"omega", "gamma", "alpha", "beta"};

  long cell = 0;
  for (int n : grid.ns) {
    for (int m : grid.ms) {
      std::vector<ReplicationResult> results(static_cast<std::size_t>(reps));
      std::atomic<long> next{0};
      auto worker = [&]() {
        for (;;) {
          const long r = next.fetch_add(1);
          if (r >= reps) break;
          DgpConfig cfg = base;
          cfg.n = n;
          cfg.m = m;
          cfg.seed = split_seed(
              base.seed, kRepStreamBase +
                             static_cast<std::uint64_t>(cell) * 1000003ULL +
                             static_cast<std::uint64_t>(r));
          try {
            results[static_cast<std::size_t>(r)] =
                run_replication(cfg, grid.taus, models, q_taus, box);
          } catch (const std::exception&) {
            // replication dropped; reps_used reflects it
          }
        }
      };
      if (threads > 1) {
        std::vector<std::thread> pool;
        for (int tix = 0; tix < threads; ++tix) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
      } else {
        worker();
      }

      if (first_step) {
        Eigen::Vector4d sum = Eigen::Vector4d::Zero();
        int used = 0;
        for (const auto& r : results) {
          if (r.step1_ok) {
            sum += r.step1_abs;
            ++used;
          }
        }
        for (int j = 0; j < 4; ++j) {
          rows.push_back({n, m, 0.0, "step1", kParamNames[j],
                          used > 0 ? sum[j] / used : 0.0, used});
        }
      }
      for (std::size_t ti = 0; ti < grid.taus.size(); ++ti) {
        const double tau = grid.taus[ti];
        auto coef_rows = [&](const char* model, auto ok_of, auto abs_of) {
          Eigen::Vector4d sum = Eigen::Vector4d::Zero();
          int used = 0;
          for (const auto& r : results) {
            if (ok_of(r)) {
              sum += abs_of(r);
              ++used;
            }
          }
          for (int j = 0; j < 4; ++j) {
            rows.push_back({n, m, tau, model, kParamNames[j],
                            used > 0 ? sum[j] / used : 0.0, used});
          }
        };
        auto fc_row = [&](const char* model, auto ok_of, auto fc_of) {
          double sum = 0.0;
          int used = 0;
          for (const auto& r : results) {
            if (ok_of(r)) {
              sum += fc_of(r);
              ++used;
            }
          }
          rows.push_back({n, m, tau, model, "forecast",
                          used > 0 ? sum / used : 0.0, used});
        };
        if (wants(ModelKind::Rg)) {
          coef_rows(
              "rg", [&](const auto& r) { return ti < r.rg_ok.size() && r.rg_ok[ti]; },
              [&](const auto& r) { return r.rg_abs[ti]; });
          fc_row(
              "rg", [&](const auto& r) { return ti < r.rg_ok.size() && r.rg_ok[ti]; },
              [&](const auto& r) { return r.rg_fc_abs[ti]; });
        }
        if (wants(ModelKind::Rr)) {
          coef_rows(
              "rr", [&](const auto& r) { return ti < r.rr_ok.size() && r.rr_ok[ti]; },
              [&](const auto& r) { return r.rr_abs[ti]; });
          fc_row(
              "rr", [&](const auto& r) { return ti < r.rr_ok.size() && r.rr_ok[ti]; },
              [&](const auto& r) { return r.rr_fc_abs[ti]; });
        }
        if (wants(ModelKind::Qgarch)) {
          fc_row(
              "qgarch", [&](const auto& r) { return ti < r.qgarch_ok.size() && r.qgarch_ok[ti]; },
              [&](const auto& r) { return r.qgarch_fc_abs[ti]; });
        }
        if (wants(ModelKind::Rcaviar)) {
          fc_row(
              "rcaviar",
              [&](const auto& r) { return ti < r.rcaviar_ok.size() && r.rcaviar_ok[ti]; },
              [&](const auto& r) { return r.rcaviar_fc_abs[ti]; });
        }
        if (wants(ModelKind::Sq)) {
          fc_row(
              "sq", [&](const auto& r) { return ti < r.sq_ok.size() && r.sq_ok[ti]; },
              [&](const auto& r) { return r.sq_fc_abs[ti]; });
        }
      }
      ++cell;
    }
  }
  return rows;
}

void write_mae_csv(const std::string& path, std::span<const MaeRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write MAE CSV: " + path);
  out << "n,m,tau,model,param,mae,reps_used\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.m << ',' << detail::format_double(r.tau) << ','
        << r.model << ',' << r.param << ',' << detail::format_double(r.mae)
        << ',' << r.reps_used << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace rgqr
