#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scidnet/config.hpp"
#include "scidnet/eval.hpp"
#include "scidnet/simgen.hpp"

namespace scidnet {

/// Contents of a configuration file. Run settings live at the top level;
/// an optional "design" object describes a simulation and an optional
/// "bench" object the Monte-Carlo settings.
struct ParsedConfig {
  RunConfig run;
  std::optional<SimDesign> design;
  ExperimentOptions bench;
};

/// Parses JSON text strictly: unknown keys, wrong types and out-of-range
/// values raise ConfigError naming the key.
ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config(const std::filesystem::path& path);

/// Applies "key=value" overrides on top of the raw config text. The value
/// is read as JSON when it parses, otherwise as a string. Dotted keys
/// reach into "design" and "bench".
ParsedConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 success, 1 configuration error, 2 data error, 3 pipeline failure.
int run_cli(int argc, char** argv);

}  // namespace scidnet
