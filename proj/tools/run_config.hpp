#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "wavechaos/noise.hpp"

namespace wavechaos::cli {

using nlohmann::json;

enum class Kind { number, integer, boolean, text, number_list, integer_list };

struct Param {
  std::string name;
  Kind kind;
  json fallback;
  std::string help;
};

struct CommandSchema {
  std::string name;
  std::string summary;
  std::vector<Param> params;
};

// Every subcommand with its parameters and defaults.
[[nodiscard]] const std::vector<CommandSchema>& command_schemas();
[[nodiscard]] const CommandSchema& schema_for(const std::string& command);

struct RunConfig {
  std::string command;
  json params = json::object();  // complete: every schema key present
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "text";

  // FNV-1a over the canonical JSON of command, params, seed and format.
  [[nodiscard]] std::string hash() const;

  [[nodiscard]] double number(const std::string& key) const;
  [[nodiscard]] long long integer(const std::string& key) const;
  [[nodiscard]] bool boolean(const std::string& key) const;
  [[nodiscard]] std::string text(const std::string& key) const;
  [[nodiscard]] std::vector<double> numbers(const std::string& key) const;
  [[nodiscard]] std::vector<int> integers(const std::string& key) const;
};

// Defaults of the command's schema.
[[nodiscard]] RunConfig default_config(const std::string& command);

// Converts a command-line string to the parameter's kind; lists are
// comma-separated.
[[nodiscard]] json convert(const Param& param, const std::string& raw);

// Applies a JSON config document: {"command", "seed", "out", "format",
// "params": {...}}. Unknown keys and ill-typed values raise ConfigError.
void apply_config_document(RunConfig& config, const json& document);

// Noise from the "family", "d", "alpha" and "groups" parameters.
[[nodiscard]] kernels::NoiseSpec noise_from(const RunConfig& config);

}  // namespace wavechaos::cli
