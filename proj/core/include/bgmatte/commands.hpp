#pragma once

// Subcommand bodies behind the bgmatte executable. They throw bgmatte::Error;
// run_command turns that into an exit code and a one-line error record.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "bgmatte/config.hpp"
#include "bgmatte/error.hpp"

namespace bgmatte {

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> truth;     // eval
  std::optional<std::filesystem::path> semantic;  // restore-bg
  std::optional<std::uint64_t> seed;
  bool dump_state = false;
  int threads = 1;
};

/// Config file (or defaults) with command-line overrides applied.
PipelineConfig effective_config(const CommandOptions& options);

void cmd_synth(const CommandOptions& options, std::ostream& log);
void cmd_matte(const CommandOptions& options, std::ostream& log);
void cmd_restore_bg(const CommandOptions& options, std::ostream& log);
/// JSON-lines records go to `out`, and to <output>/eval.jsonl when set.
void cmd_eval(const CommandOptions& options, std::ostream& out);

/// bgmatte-error kind=<kind> message="<escaped message>"
std::string error_line(const Error& error);

/// Dispatches by name; returns 0 on success, 2 on a bgmatte::Error, 3 on any
/// other exception.
int run_command(std::string_view name, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace bgmatte
