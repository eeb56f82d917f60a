#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace rgqr::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes shared by all subcommands.
enum ExitCode : int {
  kOk = 0,
  kValidationError = 1,
  kEstimationError = 2,
  kIoError = 3,
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> refit_every;
};

// Dispatches one subcommand (simulate|estimate|forecast|backtest|report|mae)
// against a config file; returns the process exit code and writes progress
// plus the run manifest to `out` and failures to `err`.
int run_command(const std::string& command, const std::string& config_path,
                const Overrides& overrides, std::ostream& out,
                std::ostream& err);

}  // namespace rgqr::cli
