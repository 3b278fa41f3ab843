#pragma once

#include <ostream>
#include <string>

#include "config.hpp"

namespace plapcli {

enum ExitCode : int {
  kSuccess = 0,
  kVerdictFailed = 1,  // hypotheses or certificates do not hold
  kNoSolutions = 2,
  kInvalidInput = 3,
};

struct CommandOptions {
  std::string out_dir;  // overrides output.directory when non-empty
  int threads = 1;
  bool force = false;   // certify even when the hypotheses fail
};

int cmd_map(const RunConfig& config, const CommandOptions& options, std::ostream& log);
int cmd_check(const RunConfig& config, const CommandOptions& options, std::ostream& log);
int cmd_certify(const RunConfig& config, const CommandOptions& options, std::ostream& log);
int cmd_solve(const RunConfig& config, const CommandOptions& options, std::ostream& log);

// Loads the config and runs one subcommand; every failure is reported on
// `err` and mapped onto the exit-code contract.
int run(const std::string& command, const std::string& config_path, const CommandOptions& options,
        std::ostream& log, std::ostream& err);

}  // namespace plapcli
