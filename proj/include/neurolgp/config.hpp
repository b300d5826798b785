#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "neurolgp/engine.hpp"

namespace nlgp {

/// Everything a command-line run needs: the run configuration plus backend,
/// output directory and batch settings.
struct CliConfig {
  RunConfig run;
  Backend backend = Backend::Trainer;
  std::filesystem::path out = "runs";
  std::size_t runs = 1;               ///< batch: seeds seed, seed+1, ... when `seeds` is empty
  std::vector<std::uint64_t> seeds;   ///< batch: explicit run seeds
  std::vector<Mode> modes{Mode::Baseline, Mode::Expensive, Mode::Surrogate};  ///< batch arms
};

/// Parses a JSON document. Every key is optional; unknown keys, wrong types and
/// out-of-range values throw ConfigError.
CliConfig parse_config(std::string_view json_text);
CliConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the full configuration, defaults included.
std::string config_to_json(const CliConfig& cfg, int indent = 2);

/// FNV-1a of the compact canonical JSON with the output directory cleared,
/// as 16 hex digits.
std::string config_hash(const CliConfig& cfg);

}  // namespace nlgp
