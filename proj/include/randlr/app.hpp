#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "randlr/config.hpp"

namespace randlr {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitHypothesis = 2, kExitNumerical = 3 };

struct RunOptions {
  std::string out_dir = ".";
  int threads = 1;
  std::optional<std::uint64_t> seed;
  /// 0 quiet, 1 summary lines, 2 detail; from RESPONSE_LOG by default.
  int verbosity = 1;
};

const std::vector<std::string>& command_names();

/// Runs one command, writes <out_dir>/<command>.json (and CSV files) and
/// returns the exit code. Errors are reported in the JSON and on stderr.
int run_command(const std::string& command, RunConfig cfg, const RunOptions& opts);

/// RESPONSE_LOG: quiet|info|debug or 0|1|2.
int verbosity_from_env();

}  // namespace randlr
