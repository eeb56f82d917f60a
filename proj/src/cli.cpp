#include "rgqr/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "rgqr/backtest.hpp"
#include "rgqr/competitors.hpp"
#include "rgqr/config.hpp"
#include "rgqr/detail/format.hpp"
#include "rgqr/market_data.hpp"
#include "rgqr/qmle.hpp"
#include "rgqr/quantile_regression.hpp"
#include "rgqr/rng.hpp"
#include "rgqr/simulator.hpp"

namespace rgqr::cli {

namespace {

using detail::format_double;

std::string tau_str(double tau) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", tau);
  return std::string(buf);
}

struct Ctx {
  IniFile ini;
  std::string config_path;
  std::uint64_t seed = 1;
  int threads = 1;
  int refit_every = 1;
  int dq_lags = 4;
  std::string out_prefix;
};

Ctx make_ctx(const std::string& config_path, const Overrides& ov) {
  Ctx ctx;
  ctx.ini = IniFile::parse_file(config_path);
  ctx.config_path = config_path;
  ctx.seed = ov.seed.value_or(ctx.ini.get_u64_or("run", "seed", 1));
  ctx.threads = ov.threads.value_or(
      static_cast<int>(ctx.ini.get_long_or("run", "threads", 1)));
  if (ctx.threads < 1) throw ConfigError("threads must be >= 1");
  ctx.refit_every = ov.refit_every.value_or(
      static_cast<int>(ctx.ini.get_long_or("backtest", "refit_every", 1)));
  if (ctx.refit_every < 1) throw ConfigError("refit_every must be >= 1");
  ctx.dq_lags =
      static_cast<int>(ctx.ini.get_long_or("backtest", "dq_lags", 4));
  ctx.out_prefix = ctx.ini.get("data", "out_prefix");
  return ctx;
}

std::vector<double> taus_from(const Ctx& ctx) {
  const std::vector<double> taus = ctx.ini.get_double_list("data", "taus");
  std::set<double> seen;
  for (double tau : taus) {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw ConfigError("config field [data] taus: value " +
                        format_double(tau) + " outside (0,1)");
    }
    if (!seen.insert(tau).second) {
      throw ConfigError("config field [data] taus: duplicate value " +
                        format_double(tau));
    }
  }
  return taus;
}

std::vector<ModelKind> models_from(const Ctx& ctx) {
  std::vector<ModelKind> models;
  for (const auto& name : ctx.ini.get_list("data", "models")) {
    models.push_back(parse_model(name));
  }
  return models;
}

ParamBox box_from(const IniFile& ini) {
  ParamBox box;
  box.lo[0] = ini.get_double_or("box", "omega_lo", box.lo[0]);
  box.hi[0] = ini.get_double_or("box", "omega_hi", box.hi[0]);
  box.lo[1] = ini.get_double_or("box", "gamma_lo", box.lo[1]);
  box.hi[1] = ini.get_double_or("box", "gamma_hi", box.hi[1]);
  box.lo[2] = ini.get_double_or("box", "alpha_lo", box.lo[2]);
  box.hi[2] = ini.get_double_or("box", "alpha_hi", box.hi[2]);
  box.lo[3] = ini.get_double_or("box", "beta_lo", box.lo[3]);
  box.hi[3] = ini.get_double_or("box", "beta_hi", box.hi[3]);
  box.validate();
  return box;
}

DgpConfig dgp_from(const Ctx& ctx) {
  DgpConfig cfg;
  cfg.params.omega = ctx.ini.get_double("dgp", "omega");
  cfg.params.gamma = ctx.ini.get_double("dgp", "gamma");
  cfg.params.alpha = ctx.ini.get_double("dgp", "alpha");
  cfg.params.beta = ctx.ini.get_double("dgp", "beta");
  cfg.w = ctx.ini.get_double("dgp", "w");
  cfg.lambda = ctx.ini.get_double("dgp", "lambda");
  cfg.n = static_cast<int>(ctx.ini.get_long("dgp", "n"));
  cfg.m = static_cast<int>(ctx.ini.get_long("dgp", "m"));
  cfg.d_df = ctx.ini.get_double_or("dgp", "d_df", cfg.d_df);
  cfg.d_nc = ctx.ini.get_double_or("dgp", "d_nc", cfg.d_nc);
  cfg.burn_in =
      static_cast<int>(ctx.ini.get_long_or("dgp", "burn_in", cfg.burn_in));
  cfg.x0 = ctx.ini.get_double_or("dgp", "x0", cfg.x0);
  cfg.seed = ctx.seed;
  cfg.validate();
  return cfg;
}

void require_readable(const std::string& path, const std::string& field) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("config field " + field + ": path does not exist: " +
                      path);
  }
}

std::vector<DailyObservation> load_observations(const Ctx& ctx) {
  if (ctx.ini.has("data", "daily_csv")) {
    const std::string path = ctx.ini.get("data", "daily_csv");
    require_readable(path, "[data] daily_csv");
    return load_daily_csv(path);
  }
  if (ctx.ini.has("data", "intraday_csv")) {
    const std::string path = ctx.ini.get("data", "intraday_csv");
    require_readable(path, "[data] intraday_csv");
    SessionCalendar cal{ctx.ini.get_double_or("data", "lambda", 6.5 / 24.0)};
    const auto days = load_intraday_csv(path, cal);
    return build_daily_observations(days, taus_from(ctx));
  }
  throw ConfigError("config needs [data] daily_csv or [data] intraday_csv");
}

void write_manifest(const Ctx& ctx, const std::string& command,
                    std::ostream& out,
                    const std::vector<std::string>& outputs) {
  std::ostringstream m;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(ctx.ini.text())));
  m << "tool=rgqr\n"
    << "version=" << kVersion << "\n"
    << "command=" << command << "\n"
    << "config=" << ctx.config_path << "\n"
    << "config_fnv1a64=" << hash << "\n"
    << "seed=" << ctx.seed << "\n"
    << "threads=" << ctx.threads << "\n"
    << "refit_every=" << ctx.refit_every << "\n";
  for (const auto& o : outputs) m << "output=" << o << "\n";
  const std::string manifest = m.str();
  const std::string path = ctx.out_prefix + ".manifest.txt";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write manifest: " + path);
  f << manifest;
  out << manifest;
}

int cmd_simulate(const Ctx& ctx, std::ostream& out) {
  const DgpConfig cfg = dgp_from(ctx);
  const std::vector<double> taus = taus_from(ctx);
  const SimulatedPanel sim = simulate_panel(cfg);
  const auto obs = build_daily_observations(sim.days, taus);

  const std::string intraday_path = ctx.out_prefix + "_intraday.csv";
  const std::string daily_path = ctx.out_prefix + "_daily.csv";
  const std::string truth_path = ctx.out_prefix + "_truth.csv";
  write_intraday_csv(intraday_path, sim.days);
  write_daily_csv(daily_path, obs);
  {
    std::ofstream f(truth_path, std::ios::binary);
    if (!f) throw IoError("cannot write truth CSV: " + truth_path);
    f << "# h_next=" << format_double(sim.truth.h_next) << "\n";
    f << "day,h,iv_true,d,ov\n";
    for (std::size_t i = 0; i < sim.truth.h.size(); ++i) {
      f << (i + 1) << ',' << format_double(sim.truth.h[i]) << ','
        << format_double(sim.truth.iv[i]) << ','
        << format_double(sim.truth.d[i]) << ','
        << format_double(sim.truth.ov[i]) << "\n";
    }
    if (!f) throw IoError("write failed: " + truth_path);
  }
  write_manifest(ctx, "simulate", out,
                 {intraday_path, daily_path, truth_path});
  return kOk;
}

struct EstimatedModels {
  bool any_failure = false;
  std::vector<std::string> coeff_lines;  // model,tau,omega,gamma,alpha,beta,status
  std::ostringstream convergence;
  bool have_garch = false;
  QmleFit qmle;
  std::map<double, QuantileCoeffs> rg, rr;
  std::map<double, QgarchFit> qgarch;
  std::map<double, RcaviarFit> rcaviar;
};

EstimatedModels estimate_models(const Ctx& ctx,
                                const std::vector<DailyObservation>& obs,
                                const std::vector<double>& taus,
                                const std::vector<ModelKind>& models) {
  EstimatedModels est;
  const ParamBox box = box_from(ctx.ini);
  auto wants = [&](ModelKind k) {
    for (auto m : models) {
      if (m == k) return true;
    }
    return false;
  };
  if (wants(ModelKind::Sq)) {
    throw ConfigError(
        "model 'sq' has no coefficients to estimate; remove it from [data] "
        "models for this command");
  }
  if (wants(ModelKind::Rr)) {
    for (double tau : taus) rq_at(obs.front(), tau);
  }

  std::vector<double> y;
  y.reserve(obs.size());
  for (const auto& o : obs) y.push_back(o.y);

  std::string first_step_error;
  if (wants(ModelKind::Rg) || wants(ModelKind::Rr)) {
    try {
      est.qmle = fit_qmle(obs, box, ctx.seed);
      est.have_garch = true;
      est.convergence << "[first_step]\n" << est.qmle.report.to_text();
    } catch (const std::exception& e) {
      first_step_error = e.what();
      est.any_failure = true;
    }
  }

  auto emit = [&](const std::string& model, double tau,
                  const Eigen::Vector4d& v, const std::string& status) {
    std::ostringstream line;
    line << model << ',' << tau_str(tau) << ',' << format_double(v[0]) << ','
         << format_double(v[1]) << ',' << format_double(v[2]) << ','
         << format_double(v[3]) << ',' << status;
    est.coeff_lines.push_back(line.str());
  };

  for (double tau : taus) {
    if (wants(ModelKind::Rg)) {
      if (est.have_garch) {
        try {
          const QuantileCoeffs c = fit_rg(obs, est.qmle.params, tau);
          est.rg[tau] = c;
          emit("rg", tau, c.vec(), "ok");
        } catch (const std::exception& e) {
          est.any_failure = true;
          emit("rg", tau, Eigen::Vector4d::Zero(),
               std::string("failed:") + e.what());
        }
      } else {
        emit("rg", tau, Eigen::Vector4d::Zero(),
             "failed:" + first_step_error);
      }
    }
    if (wants(ModelKind::Rr)) {
      if (est.have_garch) {
        try {
          const QuantileCoeffs c = fit_rr(obs, est.qmle.params, tau);
          est.rr[tau] = c;
          emit("rr", tau, c.vec(), "ok");
        } catch (const std::exception& e) {
          est.any_failure = true;
          emit("rr", tau, Eigen::Vector4d::Zero(),
               std::string("failed:") + e.what());
        }
      } else {
        emit("rr", tau, Eigen::Vector4d::Zero(),
             "failed:" + first_step_error);
      }
    }
    if (wants(ModelKind::Qgarch)) {
      try {
        const QgarchFit fit = fit_qgarch(y, tau, ctx.seed);
        est.qgarch[tau] = fit;
        emit("qgarch", tau,
             {fit.coeffs[0], fit.coeffs[1], fit.coeffs[2], 0.0}, "ok");
        est.convergence << "[qgarch tau=" << tau_str(tau) << "]\n"
                        << fit.report.to_text();
      } catch (const std::exception& e) {
        est.any_failure = true;
        emit("qgarch", tau, Eigen::Vector4d::Zero(),
             std::string("failed:") + e.what());
      }
    }
    if (wants(ModelKind::Rcaviar)) {
      try {
        const RcaviarFit fit = fit_rcaviar(obs, tau, ctx.seed);
        est.rcaviar[tau] = fit;
        emit("rcaviar", tau,
             {fit.params.omega, fit.params.gamma, fit.params.alpha,
              fit.params.beta},
             "ok");
        est.convergence << "[rcaviar tau=" << tau_str(tau) << "]\n"
                        << fit.report.to_text();
      } catch (const std::exception& e) {
        est.any_failure = true;
        emit("rcaviar", tau, Eigen::Vector4d::Zero(),
             std::string("failed:") + e.what());
      }
    }
  }
  return est;
}

void write_coeff_csv(const std::string& path,
                     const std::vector<std::string>& lines) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write coefficients CSV: " + path);
  f << "model,tau,omega,gamma,alpha,beta,status\n";
  for (const auto& line : lines) f << line << "\n";
  if (!f) throw IoError("write failed: " + path);
}

int cmd_estimate(const Ctx& ctx, std::ostream& out) {
  const auto obs = load_observations(ctx);
  const auto taus = taus_from(ctx);
  const auto models = models_from(ctx);
  EstimatedModels est = estimate_models(ctx, obs, taus, models);

  const std::string coeff_path = ctx.out_prefix + "_coeffs.csv";
  write_coeff_csv(coeff_path, est.coeff_lines);
  std::vector<std::string> outputs{coeff_path};

  const std::string conv_path = ctx.out_prefix + "_convergence.txt";
  {
    std::ofstream f(conv_path, std::ios::binary);
    if (!f) throw IoError("cannot write convergence report: " + conv_path);
    f << est.convergence.str();
  }
  outputs.push_back(conv_path);

  if (est.have_garch) {
    const std::string garch_path = ctx.out_prefix + "_garch.ini";
    std::ofstream f(garch_path, std::ios::binary);
    if (!f) throw IoError("cannot write fitted params: " + garch_path);
    f << "[garch]\n"
      << "omega=" << format_double(est.qmle.params.omega) << "\n"
      << "gamma=" << format_double(est.qmle.params.gamma) << "\n"
      << "alpha=" << format_double(est.qmle.params.alpha) << "\n"
      << "beta=" << format_double(est.qmle.params.beta) << "\n"
      << "objective=" << format_double(est.qmle.objective) << "\n";
    outputs.push_back(garch_path);
  }

  write_manifest(ctx, "estimate", out, outputs);
  return est.any_failure ? kEstimationError : kOk;
}

int cmd_forecast(const Ctx& ctx, std::ostream& out) {
  const auto obs = load_observations(ctx);
  const auto taus = taus_from(ctx);
  const auto models = models_from(ctx);

  // sq forecasts directly from the trailing sample; other models from fits.
  std::vector<ModelKind> fit_models;
  for (auto m : models) {
    if (m != ModelKind::Sq) fit_models.push_back(m);
  }
  EstimatedModels est;
  if (!fit_models.empty()) {
    est = estimate_models(ctx, obs, taus, fit_models);
  }

  const DailyObservation& last = obs.back();
  std::vector<double> y;
  y.reserve(obs.size());
  for (const auto& o : obs) y.push_back(o.y);

  const std::string path = ctx.out_prefix + "_next_var.csv";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write forecast CSV: " + path);
  f << "model,tau,q_hat,status\n";
  bool any_failure = est.any_failure;
  auto h_last_fitted = [&]() {
    if (!est.have_garch) throw OptimError("first-step fit unavailable");
    return est.qmle.state.h[est.qmle.state.h.size() - 1];
  };
  for (double tau : taus) {
    for (auto m : models) {
      std::string q = "nan";
      std::string status = "ok";
      try {
        switch (m) {
          case ModelKind::Rg:
            q = format_double(forecast_quantile(est.rg.at(tau),
                                                h_last_fitted(),
                                                std::sqrt(last.rv), last.ov));
            break;
          case ModelKind::Rr:
            q = format_double(forecast_quantile(est.rr.at(tau),
                                                h_last_fitted(),
                                                rq_at(last, tau), last.ov));
            break;
          case ModelKind::Qgarch:
            q = format_double(est.qgarch.at(tau).forecast(last.y));
            break;
          case ModelKind::Rcaviar:
            q = format_double(est.rcaviar.at(tau).forecast(last.rv, last.y));
            break;
          case ModelKind::Sq:
            q = format_double(sample_quantile_forecast(y, tau));
            break;
        }
      } catch (const std::exception& e) {
        any_failure = true;
        status = std::string("failed:") + e.what();
      }
      f << model_name(m) << ',' << tau_str(tau) << ',' << q << ',' << status
        << "\n";
    }
  }
  if (!f) throw IoError("write failed: " + path);
  f.close();
  write_manifest(ctx, "forecast", out, {path});
  return any_failure ? kEstimationError : kOk;
}

void normalize_relative_losses(std::vector<BacktestReport>& reports) {
  for (auto& rep : reports) {
    if (rep.model != "rg") continue;
    for (auto& other : reports) {
      if (other.tau == rep.tau && rep.avg_loss > 0.0) {
        other.rel_loss = other.avg_loss / rep.avg_loss;
      }
    }
    rep.rel_loss = 1.0;
  }
}

int cmd_backtest(const Ctx& ctx, std::ostream& out) {
  const auto obs = load_observations(ctx);
  const auto taus = taus_from(ctx);
  const auto models = models_from(ctx);
  const int window = static_cast<int>(ctx.ini.get_long("backtest", "window"));
  if (window >= static_cast<int>(obs.size())) {
    throw ConfigError("backtest window " + std::to_string(window) +
                      " must be smaller than the panel length " +
                      std::to_string(obs.size()));
  }
  bool have_rg = false;
  bool have_rr = false;
  for (auto m : models) {
    have_rg = have_rg || m == ModelKind::Rg;
    have_rr = have_rr || m == ModelKind::Rr;
  }
  if (!have_rg) {
    throw ConfigError(
        "relative losses are normalized by the rg model; add rg to [data] "
        "models");
  }
  if (have_rr) {
    for (double tau : taus) rq_at(obs.front(), tau);
  }

  RollingOptions opt;
  opt.refit_every = ctx.refit_every;
  opt.dq_lags = ctx.dq_lags;
  opt.box = box_from(ctx.ini);
  opt.threads = ctx.threads;

  std::vector<BacktestReport> reports;
  std::vector<std::string> outputs;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
      opt.seed = split_seed(ctx.seed, 100 * (mi + 1) + ti);
      const RollingResult res =
          rolling_backtest(obs, models[mi], taus[ti], window, opt);
      const std::string fpath = ctx.out_prefix + "_forecasts_" +
                                model_name(models[mi]) + "_" +
                                tau_str(taus[ti]) + ".csv";
      write_forecast_csv(fpath, res.rows);
      outputs.push_back(fpath);
      reports.push_back(res.report);
    }
  }
  normalize_relative_losses(reports);
  const std::string rpath = ctx.out_prefix + "_report.csv";
  write_report_csv(rpath, reports);
  outputs.push_back(rpath);
  for (const auto& rep : reports) out << rep.to_text() << "\n";
  write_manifest(ctx, "backtest", out, outputs);
  return kOk;
}

int cmd_report(const Ctx& ctx, std::ostream& out) {
  const auto taus = taus_from(ctx);
  const auto models = models_from(ctx);
  const std::string prefix =
      ctx.ini.get_or("data", "forecasts_prefix", ctx.out_prefix);
  bool have_rg = false;
  for (auto m : models) have_rg = have_rg || m == ModelKind::Rg;
  if (!have_rg) {
    throw ConfigError(
        "relative losses are normalized by the rg model; add rg to [data] "
        "models");
  }
  std::vector<BacktestReport> reports;
  for (auto m : models) {
    for (double tau : taus) {
      const std::string fpath = prefix + "_forecasts_" + model_name(m) + "_" +
                                tau_str(tau) + ".csv";
      require_readable(fpath, "[data] forecasts_prefix");
      const auto rows = load_forecast_csv(fpath);
      reports.push_back(
          score_forecasts(model_name(m), tau, rows, ctx.dq_lags));
    }
  }
  normalize_relative_losses(reports);
  const std::string rpath = ctx.out_prefix + "_report.csv";
  write_report_csv(rpath, reports);
  for (const auto& rep : reports) out << rep.to_text() << "\n";
  write_manifest(ctx, "report", out, {rpath});
  return kOk;
}

int cmd_mae(const Ctx& ctx, std::ostream& out) {
  const DgpConfig base = dgp_from(ctx);
  MaeGrid grid;
  for (double v : ctx.ini.get_double_list("experiment", "n_list")) {
    grid.ns.push_back(static_cast<int>(v));
  }
  for (double v : ctx.ini.get_double_list("experiment", "m_list")) {
    grid.ms.push_back(static_cast<int>(v));
  }
  grid.taus = taus_from(ctx);
  const int reps =
      static_cast<int>(ctx.ini.get_long("experiment", "reps"));
  const auto models = models_from(ctx);
  const ParamBox box = box_from(ctx.ini);
  const auto rows =
      mae_experiment(base, grid, reps, models, box, ctx.threads);
  const std::string path = ctx.out_prefix + "_mae.csv";
  write_mae_csv(path, rows);
  write_manifest(ctx, "mae", out, {path});
  return kOk;
}

}  // namespace

int run_command(const std::string& command, const std::string& config_path,
                const Overrides& overrides, std::ostream& out,
                std::ostream& err) {
  try {
    const Ctx ctx = make_ctx(config_path, overrides);
    if (command == "simulate") return cmd_simulate(ctx, out);
    if (command == "estimate") return cmd_estimate(ctx, out);
    if (command == "forecast") return cmd_forecast(ctx, out);
    if (command == "backtest") return cmd_backtest(ctx, out);
    if (command == "report") return cmd_report(ctx, out);
    if (command == "mae") return cmd_mae(ctx, out);
    err << "error: unknown command '" << command << "'\n";
    return kValidationError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const OptimError& e) {
    err << "estimation error: " << e.what() << "\n";
    return kEstimationError;
  } catch (const SingularDesignError& e) {
    err << "estimation error: " << e.what() << "\n";
    return kEstimationError;
  } catch (const std::exception& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidationError;
  }
}

}  // namespace rgqr::cli
