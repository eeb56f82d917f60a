#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>

#include "rgqr/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "rgqr: realized-GARCH quantile regression, VaR forecasting and "
      "backtesting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rgqr::cli::kVersion));

  struct Args {
    std::string config;
    rgqr::cli::Overrides overrides;
  };

  static const struct {
    const char* name;
    const char* help;
  } kCommands[] = {
      {"simulate", "generate an intraday panel, daily series and ground truth"},
      {"estimate", "fit the requested models on a daily series"},
      {"forecast", "one-day-ahead VaR forecasts from full-sample fits"},
      {"backtest", "rolling-window forecasts, losses and coverage tests"},
      {"report", "recompute the report from stored forecast files"},
      {"mae", "simulation grid of mean absolute estimation errors"},
  };

  std::map<std::string, Args> args;
  for (const auto& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    Args& a = args[c.name];
    sub->add_option("--config", a.config, "path to the INI config file")
        ->required();
    sub->add_option("--seed", a.overrides.seed, "override [run] seed");
    sub->add_option("--threads", a.overrides.threads,
                    "override [run] threads");
    sub->add_option("--refit-every", a.overrides.refit_every,
                    "override [backtest] refit_every");
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& c : kCommands) {
    if (app.got_subcommand(c.name)) {
      const Args& a = args.at(c.name);
      return rgqr::cli::run_command(c.name, a.config, a.overrides, std::cout,
                                    std::cerr);
    }
  }
  std::cerr << "error: no subcommand given\n";
  return rgqr::cli::kValidationError;
}
