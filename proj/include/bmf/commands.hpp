#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace bmf {

enum ExitCode : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_config = 2,
  exit_numerical = 3,
  exit_property = 4,
};

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;  // falls back to BELAVKIN_MF_THREADS
};

// Runs one subcommand (simulate-mf, simulate-nbody, converge, delta-sweep,
// proptest-operators). Failures are reported as one JSON object on `err`.
int run_command(const std::string& name, const CommandOptions& opts, std::ostream& err);

// Full command-line entry point.
int run_cli(int argc, char** argv);

}  // namespace bmf
