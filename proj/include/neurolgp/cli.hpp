#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neurolgp/config.hpp"

namespace nlgp::cli {

/// Exit codes shared by all commands.
enum ExitCode : int {
  kOk = 0,
  kRepaired = 1,      ///< validate: the genome needed repair
  kConfigError = 2,   ///< bad flags, bad configuration, unparsable genome
  kRuntimeError = 3,  ///< a run failed after starting
};

/// Command-line overrides applied on top of a configuration file.
struct Overrides {
  std::optional<std::filesystem::path> config;
  std::optional<std::string> mode;
  std::optional<std::string> backend;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> runs;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> modes;
};

/// Loads the configuration and applies overrides. Throws ConfigError.
CliConfig resolve(const Overrides& o);

/// One run of the configured arm into cfg.out: runlog.jsonl, generations.csv,
/// surrogate_fit.csv (surrogate mode), best_genome.txt and manifest.json.
int cmd_run(const CliConfig& cfg, std::ostream& out, std::ostream& err);

/// Every (mode, seed) pair into cfg.out/<mode>_seed<seed>, plus
/// batch_summary.csv. A failing run is recorded and the batch continues.
int cmd_batch(const CliConfig& cfg, std::ostream& out, std::ostream& err);

/// Prints the effective chain, shapes, parameter count and repair report of a
/// genome listing. Exit 0 if already valid, 1 if repair was needed, 2 if the
/// file cannot be read or parsed.
int cmd_validate(const std::filesystem::path& file, const TensorShape& input, int num_classes,
                 std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace nlgp::cli
