#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace colorent::cli {

inline constexpr const char* kVersion = "0.3.0";

struct RunResult {
  int exit_code = 0;
  std::filesystem::path run_dir;  // empty when nothing was written
};

/// Parses `args` (without the program name), runs the subcommand, and writes
/// <out>/<command>-<timestamp>/{data.csv, manifest.json, states/}.
/// Exit codes: 0 success, 1 usage error, 2 numerical failure.
RunResult run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err);

/// Argument list that re-runs the command recorded in a manifest.
std::vector<std::string> replay_args(const std::filesystem::path& manifest);

}  // namespace colorent::cli
