#include "rgqr/backtest.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
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

using detail::format_double;
using detail::parse_double;
using detail::parse_long;
using detail::split_csv;
using detail::strip_cr;

double xlogy(double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; }

std::string format_tau(double tau) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", tau);
  return std::string(buf);
}

int min_window(ModelKind model) {
  switch (model) {
    case ModelKind::Rg:
    case ModelKind::Rr:
      return 50;
    case ModelKind::Qgarch:
    case ModelKind::Rcaviar:
      return 100;
    case ModelKind::Sq:
      return 20;
  }
  return 50;
}

std::vector<double> window_returns(std::span<const DailyObservation> ws) {
  std::vector<double> y;
  y.reserve(ws.size());
  for (const auto& o : ws) y.push_back(o.y);
  return y;
}

struct FittedModel {
  GarchParams garch{};
  QuantileCoeffs coeffs{};
  QgarchFit qgarch{};
  RcaviarFit rcaviar{};
};

FittedModel refit_model(std::span<const DailyObservation> ws, ModelKind model,
                        double tau, const RollingOptions& opt,
                        std::uint64_t seed) {
  FittedModel fm;
  switch (model) {
    case ModelKind::Rg: {
      const QmleFit fit = fit_qmle(ws, opt.box, seed);
      fm.garch = fit.params;
      fm.coeffs = fit_rg(ws, fit.params, tau);
      break;
    }
    case ModelKind::Rr: {
      const QmleFit fit = fit_qmle(ws, opt.box, seed);
      fm.garch = fit.params;
      fm.coeffs = fit_rr(ws, fit.params, tau);
      break;
    }
    case ModelKind::Qgarch: {
      const std::vector<double> y = window_returns(ws);
      fm.qgarch = fit_qgarch(y, tau, seed);
      break;
    }
    case ModelKind::Rcaviar:
      fm.rcaviar = fit_rcaviar(ws, tau, seed);
      break;
    case ModelKind::Sq:
      break;
  }
  return fm;
}

// One-step-ahead forecast with the cached parameters, state variables
// recomputed over the current trailing window.
double forecast_with(const FittedModel& fm, ModelKind model,
                     std::span<const DailyObservation> ws, double tau) {
  const DailyObservation& last = ws.back();
  switch (model) {
    case ModelKind::Rg: {
      const VolFilterState st = filter_h(fm.garch, ws, default_h1(ws));
      return forecast_quantile(fm.coeffs, st.h[st.h.size() - 1],
                               std::sqrt(last.rv), last.ov);
    }
    case ModelKind::Rr: {
      const VolFilterState st = filter_h(fm.garch, ws, default_h1(ws));
      return forecast_quantile(fm.coeffs, st.h[st.h.size() - 1],
                               rq_at(last, tau), last.ov);
    }
    case ModelKind::Qgarch: {
      double mean_sq = 0.0;
      for (const auto& o : ws) mean_sq += o.y * o.y;
      mean_sq /= static_cast<double>(ws.size());
      double h = std::sqrt(std::max(mean_sq, 1e-12));
      for (std::size_t i = 1; i < ws.size(); ++i) {
        h = fm.qgarch.vol.omega + fm.qgarch.vol.gamma * h +
            fm.qgarch.vol.alpha * std::fabs(ws[i - 1].y);
      }
      return fm.qgarch.coeffs[0] + fm.qgarch.coeffs[1] * h +
             fm.qgarch.coeffs[2] * std::fabs(last.y);
    }
    case ModelKind::Rcaviar: {
      const std::vector<double> y = window_returns(ws);
      double q = empirical_quantile(
          std::vector<double>(y.begin(), y.begin() + 50), tau);
      for (std::size_t i = 1; i < ws.size(); ++i) {
        q = fm.rcaviar.params.omega + fm.rcaviar.params.gamma * q +
            fm.rcaviar.params.alpha * std::sqrt(ws[i - 1].rv) +
            fm.rcaviar.params.beta * std::fabs(ws[i - 1].y);
      }
      return fm.rcaviar.params.omega + fm.rcaviar.params.gamma * q +
             fm.rcaviar.params.alpha * std::sqrt(last.rv) +
             fm.rcaviar.params.beta * std::fabs(last.y);
    }
    case ModelKind::Sq: {
      const std::vector<double> y = window_returns(ws);
      return sample_quantile_forecast(y, tau);
    }
  }
  throw DomainError("forecast_with: unknown model");
}

}  // namespace

ModelKind parse_model(const std::string& name) {
  if (name == "rg") return ModelKind::Rg;
  if (name == "rr") return ModelKind::Rr;
  if (name == "qgarch") return ModelKind::Qgarch;
  if (name == "rcaviar") return ModelKind::Rcaviar;
  if (name == "sq") return ModelKind::Sq;
  throw ConfigError("unknown model '" + name +
                    "' (expected rg|rr|qgarch|rcaviar|sq)");
}

std::string model_name(ModelKind model) {
  switch (model) {
    case ModelKind::Rg:
      return "rg";
    case ModelKind::Rr:
      return "rr";
    case ModelKind::Qgarch:
      return "qgarch";
    case ModelKind::Rcaviar:
      return "rcaviar";
    case ModelKind::Sq:
      return "sq";
  }
  return "?";
}

double quantile_loss(std::span<const double> y, std::span<const double> q,
                     double tau) {
  if (y.size() != q.size()) {
    throw AlignmentError("quantile_loss: series lengths differ");
  }
  if (y.empty()) throw InsufficientDataError("quantile_loss: empty series");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    acc += check_loss(tau, y[i] - q[i]);
  }
  return acc / static_cast<double>(y.size());
}

TestResult lruc_test(const std::vector<int>& hits, double tau) {
  if (hits.empty()) throw InsufficientDataError("lruc_test: no hits");
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("lruc_test: tau must lie in (0,1)");
  }
  const auto n = static_cast<double>(hits.size());
  double x = 0.0;
  for (int h : hits) x += (h != 0) ? 1.0 : 0.0;
  const double ll_null = xlogy(x, tau) + xlogy(n - x, 1.0 - tau);
  const double ll_alt = xlogy(x, x / n) + xlogy(n - x, 1.0 - x / n);
  TestResult res;
  res.stat = std::max(0.0, 2.0 * (ll_alt - ll_null));
  res.p_value = chi2_sf(res.stat, 1.0);
  return res;
}

LrccResult lrcc_test(const std::vector<int>& hits, double tau) {
  if (hits.size() < 2) {
    throw InsufficientDataError("lrcc_test: need >= 2 hits");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("lrcc_test: tau must lie in (0,1)");
  }
  double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
  double x = 0.0;
  for (std::size_t i = 1; i < hits.size(); ++i) {
    const bool prev = hits[i - 1] != 0;
    const bool cur = hits[i] != 0;
    n00 += (!prev && !cur);
    n01 += (!prev && cur);
    n10 += (prev && !cur);
    n11 += (prev && cur);
    x += cur ? 1.0 : 0.0;
  }
  const double npairs = static_cast<double>(hits.size()) - 1.0;
  const double ll_null = xlogy(x, tau) + xlogy(npairs - x, 1.0 - tau);
  LrccResult res;
  double ll_alt = 0.0;
  if (n00 + n01 > 0.0) {
    const double p01 = n01 / (n00 + n01);
    ll_alt += xlogy(n01, p01) + xlogy(n00, 1.0 - p01);
  } else {
    res.degenerate = true;
  }
  if (n10 + n11 > 0.0) {
    const double p11 = n11 / (n10 + n11);
    ll_alt += xlogy(n11, p11) + xlogy(n10, 1.0 - p11);
  } else {
    res.degenerate = true;
  }
  res.stat = std::max(0.0, 2.0 * (ll_alt - ll_null));
  res.p_value = chi2_sf(res.stat, 2.0);
  return res;
}

TestResult dq_test(const std::vector<int>& hits,
                   const std::vector<double>& forecasts, double tau,
                   int lags) {
  if (hits.size() != forecasts.size()) {
    throw AlignmentError("dq_test: hits and forecasts lengths differ");
  }
  if (lags < 1) throw DomainError("dq_test: lags must be >= 1");
  const auto n = static_cast<long>(hits.size());
  if (n <= lags + 10) {
    throw InsufficientDataError("dq_test: need > lags + 10 observations");
  }
  const long rows = n - lags;
  const int k = lags + 2;
  Eigen::MatrixXd X(rows, k);
  Eigen::VectorXd v(rows);
  for (long i = lags; i < n; ++i) {
    const long r = i - lags;
    X(r, 0) = 1.0;
    for (int j = 1; j <= lags; ++j) {
      X(r, j) = static_cast<double>(hits[static_cast<std::size_t>(i - j)]) -
                tau;
    }
    X(r, k - 1) = forecasts[static_cast<std::size_t>(i)];
    v[r] = static_cast<double>(hits[static_cast<std::size_t>(i)]) - tau;
  }
  const Eigen::MatrixXd g = X.transpose() * X;
  const Eigen::VectorXd b = X.transpose() * v;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) {
    throw SingularDesignError("dq_test: regressor cross-product is singular");
  }
  TestResult res;
  res.stat = std::max(0.0, b.dot(lu.solve(b)) / (tau * (1.0 - tau)));
  res.p_value = chi2_sf(res.stat, static_cast<double>(k));
  return res;
}

std::string BacktestReport::to_text() const {
  std::ostringstream os;
  os.precision(10);
  os << "model=" << model << "\n"
     << "tau=" << tau << "\n"
     << "n_forecasts=" << n_forecasts << "\n"
     << "skipped=" << skipped << "\n"
     << "avg_loss=" << avg_loss << "\n"
     << "rel_loss=" << rel_loss << "\n"
     << "hit_rate=" << hit_rate << "\n";
  if (lruc) os << "lruc=" << lruc->stat << "\nlruc_p=" << lruc->p_value << "\n";
  if (lrcc) {
    os << "lrcc=" << lrcc->stat << "\nlrcc_p=" << lrcc->p_value << "\n";
    if (lrcc->degenerate) os << "lrcc_degenerate=1\n";
  }
  if (dq) os << "dq=" << dq->stat << "\ndq_p=" << dq->p_value << "\n";
  if (!notes.empty()) os << "notes=" << notes << "\n";
  return os.str();
}

BacktestReport score_forecasts(const std::string& model, double tau,
                               std::span<const ForecastRow> rows,
                               int dq_lags) {
  BacktestReport rep;
  rep.model = model;
  rep.tau = tau;
  rep.n_forecasts = static_cast<int>(rows.size());
  if (rows.empty()) {
    rep.avg_loss = std::numeric_limits<double>::quiet_NaN();
    rep.notes = "no_forecasts";
    return rep;
  }
  std::vector<double> y;
  std::vector<double> q;
  std::vector<int> hits;
  for (const auto& r : rows) {
    y.push_back(r.y);
    q.push_back(r.q_hat);
    hits.push_back(r.hit);
  }
  rep.avg_loss = quantile_loss(y, q, tau);
  double hr = 0.0;
  for (int h : hits) hr += h;
  rep.hit_rate = hr / static_cast<double>(hits.size());
  rep.lruc = lruc_test(hits, tau);
  if (hits.size() >= 2) rep.lrcc = lrcc_test(hits, tau);
  if (static_cast<long>(hits.size()) > dq_lags + 10) {
    try {
      rep.dq = dq_test(hits, q, tau, dq_lags);
    } catch (const SingularDesignError&) {
      rep.notes += (rep.notes.empty() ? "" : ";");
      rep.notes += "dq_singular";
    }
  }
  return rep;
}

RollingResult rolling_backtest(std::span<const DailyObservation> obs,
                               ModelKind model, double tau, int window,
                               const RollingOptions& opt) {
  const auto n = static_cast<long>(obs.size());
  if (!(window >= 1 && window < n)) {
    throw ConfigError("rolling_backtest: need 1 <= window < panel length");
  }
  if (window < min_window(model)) {
    throw ConfigError("rolling_backtest: window " + std::to_string(window) +
                      " below minimum " + std::to_string(min_window(model)) +
                      " for model " + model_name(model));
  }
  if (opt.refit_every < 1) {
    throw ConfigError("rolling_backtest: refit_every must be >= 1");
  }

  const long days = n - window;
  std::vector<std::optional<ForecastRow>> slots(
      static_cast<std::size_t>(days));
  std::atomic<int> skipped{0};
  std::string first_error;
  std::mutex err_mutex;

  auto run_day = [&](long d, FittedModel& cache, bool& have_cache) {
    const long t = window + d;
    const auto ws = obs.subspan(static_cast<std::size_t>(t - window),
                                static_cast<std::size_t>(window));
    const bool need_refit = (d % opt.refit_every) == 0;
    if (model != ModelKind::Sq && need_refit) {
      try {
        cache = refit_model(ws, model, tau, opt,
                            split_seed(opt.seed, 4000 +
                                                     static_cast<std::uint64_t>(t)));
        have_cache = true;
      } catch (const std::exception& e) {
        ++skipped;
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error.empty()) first_error = e.what();
        return;
      }
    }
    if (model != ModelKind::Sq && !have_cache) {
      ++skipped;
      return;
    }
    try {
      ForecastRow row;
      row.day = obs[static_cast<std::size_t>(t)].day_index;
      row.y = obs[static_cast<std::size_t>(t)].y;
      row.q_hat = forecast_with(cache, model, ws, tau);
      row.hit = row.y < row.q_hat ? 1 : 0;
      slots[static_cast<std::size_t>(d)] = row;
    } catch (const std::exception& e) {
      ++skipped;
      std::lock_guard<std::mutex> lock(err_mutex);
      if (first_error.empty()) first_error = e.what();
    }
  };

  const bool parallel = opt.threads > 1 && opt.refit_every == 1 && days > 1;
  if (parallel) {
    std::atomic<long> next{0};
    auto worker = [&]() {
      FittedModel cache;
      bool have_cache = false;
      for (;;) {
        const long d = next.fetch_add(1);
        if (d >= days) break;
        have_cache = false;
        run_day(d, cache, have_cache);
      }
    };
    std::vector<std::thread> pool;
    const int nt = std::min<long>(opt.threads, days);
    pool.reserve(static_cast<std::size_t>(nt));
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  } else {
    FittedModel cache;
    bool have_cache = false;
    for (long d = 0; d < days; ++d) run_day(d, cache, have_cache);
  }

  RollingResult result;
  for (const auto& slot : slots) {
    if (slot) result.rows.push_back(*slot);
  }
  result.report =
      score_forecasts(model_name(model), tau, result.rows, opt.dq_lags);
  result.report.skipped = skipped.load();
  if (!first_error.empty()) {
    result.report.notes += (result.report.notes.empty() ? "" : ";");
    result.report.notes += "refit_error:" + first_error;
  }
  return result;
}

void write_forecast_csv(const std::string& path,
                        std::span<const ForecastRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write forecast CSV: " + path);
  out << "day,y,q_hat,hit\n";
  for (const auto& r : rows) {
    out << r.day << ',' << format_double(r.y) << ',' << format_double(r.q_hat)
        << ',' << r.hit << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<ForecastRow> load_forecast_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open forecast CSV: " + path);
  std::vector<ForecastRow> rows;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "day,y,q_hat,hit") {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected header 'day,y,q_hat,hit'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 4 fields");
    }
    ForecastRow r;
    r.day = static_cast<int>(parse_long(fields[0], line_no));
    r.y = parse_double(fields[1], line_no);
    r.q_hat = parse_double(fields[2], line_no);
    r.hit = static_cast<int>(parse_long(fields[3], line_no));
    rows.push_back(r);
  }
  if (!header_seen) throw ParseError("forecast CSV missing header");
  return rows;
}

void write_report_csv(const std::string& path,
                      std::span<const BacktestReport> reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report CSV: " + path);
  out << "model,tau,avg_loss,rel_loss,hit_rate,lruc,lruc_p,lrcc,lrcc_p,dq,"
         "dq_p\n";
  auto opt_stat = [](const auto& t) {
    return t ? format_double(t->stat) : std::string("nan");
  };
  auto opt_p = [](const auto& t) {
    return t ? format_double(t->p_value) : std::string("nan");
  };
  for (const auto& r : reports) {
    out << r.model << ',' << format_tau(r.tau) << ','
        << format_double(r.avg_loss) << ',' << format_double(r.rel_loss)
        << ',' << format_double(r.hit_rate) << ',' << opt_stat(r.lruc) << ','
        << opt_p(r.lruc) << ',' << opt_stat(r.lrcc) << ',' << opt_p(r.lrcc)
        << ',' << opt_stat(r.dq) << ',' << opt_p(r.dq) << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace rgqr
