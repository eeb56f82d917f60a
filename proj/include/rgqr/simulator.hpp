#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgqr/backtest.hpp"
#include "rgqr/market_data.hpp"
#include "rgqr/vol_filter.hpp"

namespace rgqr {

// Data-generating process: piecewise-constant spot variance per day, split
// between session and overnight by weight w, with a multiplicative
// noncentral chi-squared disturbance d_i of mean zero.
struct DgpConfig {
  GarchParams params{1.0, 0.1, 0.5, 0.2};
  double w = 0.75;
  double lambda = 6.5 / 24.0;
  int n = 500;
  int m = 100;
  std::uint64_t seed = 1;
  double d_df = 0.05;  // degrees of freedom of d_i + 0.1
  double d_nc = 0.05;  // noncentrality; df + nc = 0.1 keeps E[d_i] = 0
  int burn_in = 200;
  double x0 = 4.605170185988091;  // initial log price

  void validate() const;
};

struct GroundTruth {
  std::vector<double> h;   // conditional standard deviations, days 1..n
  std::vector<double> iv;  // exact session integrated variance w h^2 (1+d)
  std::vector<double> d;
  std::vector<double> ov;  // realized squared overnight gaps
  double h_next = 0.0;     // h_{n+1} from the recursion
};

struct SimulatedPanel {
  std::vector<IntradayDay> days;
  GroundTruth truth;
};

// Euler path of the log price (exact for piecewise-constant variance):
// m overnight steps then m session steps per day, h updated from the exact
// session variance and the simulated overnight gap. Burn-in days are
// generated and discarded before recording. Deterministic given the seed.
SimulatedPanel simulate_panel(const DgpConfig& cfg);

struct MonteCarloQuantile {
  double q = 0.0;
  double se = 0.0;
  long reps = 0;
};

// Empirical tau-quantile of Z sqrt(1 + d) draws; the quantile of the
// return innovation used as the forecast target scale.
MonteCarloQuantile monte_carlo_true_quantile(const DgpConfig& cfg, double tau,
                                             long reps);

struct MaeGrid {
  std::vector<int> ns;
  std::vector<int> ms;
  std::vector<double> taus;
};

struct MaeRow {
  int n = 0;
  int m = 0;
  double tau = 0.0;  // 0 for first-step rows
  std::string model;
  std::string param;
  double mae = 0.0;
  int reps_used = 0;
};

// Per-replication absolute errors for one simulated panel; the building
// block shared by mae_experiment and the acceptance checks.
struct ReplicationResult {
  bool step1_ok = false;
  Eigen::Vector4d step1_abs = Eigen::Vector4d::Zero();
  // keyed by tau index, aligned with the requested tau list
  std::vector<bool> rg_ok, rr_ok;
  std::vector<Eigen::Vector4d> rg_abs, rr_abs;
  std::vector<bool> qgarch_ok, rcaviar_ok, sq_ok;
  std::vector<double> rg_fc_abs, rr_fc_abs, qgarch_fc_abs, rcaviar_fc_abs,
      sq_fc_abs;
};

ReplicationResult run_replication(const DgpConfig& cfg,
                                  const std::vector<double>& taus,
                                  const std::vector<ModelKind>& models,
                                  const std::vector<double>& q_taus,
                                  const ParamBox& box);

std::vector<MaeRow> mae_experiment(const DgpConfig& base, const MaeGrid& grid,
                                   int reps,
                                   const std::vector<ModelKind>& models,
                                   const ParamBox& box, int threads = 1);

void write_mae_csv(const std::string& path, std::span<const MaeRow> rows);

}  // namespace rgqr
