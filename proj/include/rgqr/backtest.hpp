#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rgqr/market_data.hpp"
#include "rgqr/vol_filter.hpp"

namespace rgqr {

enum class ModelKind { Rg, Rr, Qgarch, Rcaviar, Sq };

ModelKind parse_model(const std::string& name);
std::string model_name(ModelKind model);

struct TestResult {
  double stat = 0.0;
  double p_value = 1.0;
};

struct LrccResult {
  double stat = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // an empty transition row contributed factor 1
};

// Mean check loss of the forecast errors y_i - q_i.
double quantile_loss(std::span<const double> y, std::span<const double> q,
                     double tau);

// Kupiec unconditional-coverage likelihood ratio, chi-squared with 1 df.
TestResult lruc_test(const std::vector<int>& hits, double tau);

// Christoffersen conditional-coverage likelihood ratio against the
// first-order Markov alternative, chi-squared with 2 df. The null hit
// count runs over i = 2..n to match the transition likelihood.
LrccResult lrcc_test(const std::vector<int>& hits, double tau);

// Dynamic quantile test with the first `lags` lagged demeaned hits and the
// VaR forecast as regressors, chi-squared with lags + 2 df.
TestResult dq_test(const std::vector<int>& hits,
                   const std::vector<double>& forecasts, double tau,
                   int lags);

struct ForecastRow {
  int day = 0;
  double y = 0.0;
  double q_hat = 0.0;
  int hit = 0;
};

struct BacktestReport {
  std::string model;
  double tau = 0.0;
  int n_forecasts = 0;
  int skipped = 0;
  double avg_loss = 0.0;
  double rel_loss = std::numeric_limits<double>::quiet_NaN();
  double hit_rate = 0.0;
  std::optional<TestResult> lruc;
  std::optional<LrccResult> lrcc;
  std::optional<TestResult> dq;
  std::string notes;

  std::string to_text() const;
};

struct RollingOptions {
  int refit_every = 1;
  int dq_lags = 4;
  ParamBox box{};
  std::uint64_t seed = 0;
  int threads = 1;
};

struct RollingResult {
  BacktestReport report;
  std::vector<ForecastRow> rows;
};

// For each day t past the window: refit the model on the trailing window
// (every refit_every days), forecast day t, and record the hit
// 1{y_t < q_hat_t}. Refit failures skip the day and are counted.
RollingResult rolling_backtest(std::span<const DailyObservation> obs,
                               ModelKind model, double tau, int window,
                               const RollingOptions& opt = {});

BacktestReport score_forecasts(const std::string& model, double tau,
                               std::span<const ForecastRow> rows,
                               int dq_lags = 4);

void write_forecast_csv(const std::string& path,
                        std::span<const ForecastRow> rows);
std::vector<ForecastRow> load_forecast_csv(const std::string& path);
void write_report_csv(const std::string& path,
                      std::span<const BacktestReport> reports);

}  // namespace rgqr
