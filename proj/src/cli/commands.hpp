#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace rcas::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode { kOk = 0, kRuntimeError = 1, kConfigError = 2 };

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> strategy;  ///< simulate-dynamic only
  std::string oracle = "split";         ///< enumerate: split, capon or combined
  bool quiet = false;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

/// Loads the config, applies the overrides and dispatches. Never throws;
/// failures are reported on `io.err` and mapped to an ExitCode.
int run_command(const std::string& name, const CommandOptions& options, Streams io);

/// Same, from an already parsed config (overrides already applied).
int run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& options, Streams io);

const std::vector<std::string>& command_names();

}  // namespace rcas::cli
