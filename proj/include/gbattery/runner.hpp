// Subcommand dispatch: turns a RunConfig into CSV files and a manifest.
#pragma once

#include "gbattery/config.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gb {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };
using Logger = std::function<void(LogLevel, const std::string&)>;

struct RunOptions {
  std::string command;
  std::optional<std::string> out;  // overrides output_dir
  int jobs = 0;                    // <= 0: hardware concurrency
  std::optional<double> td;
  std::optional<double> theta;
  std::optional<Scenario> scenario;
  std::optional<double> t_charge;
};

const std::vector<std::string>& subcommands();

// Applies the command-line overrides that live in the config itself.
RunConfig effective_config(RunConfig cfg, const RunOptions& opt);

// Returns the process exit status. `console` receives the human summary.
int run(const RunConfig& cfg, const RunOptions& opt, std::ostream& console,
        const Logger& log = {});

}  // namespace gb
