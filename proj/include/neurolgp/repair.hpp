#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "neurolgp/genome.hpp"

namespace nlgp {

enum class RepairRule : std::uint8_t {
  InsertConvEmpty,  ///< no effective code: insert a Conv writing r[0]
  PrependConv,      ///< first effective layer is not a Conv
  RemoveReducing,   ///< pooling exhausted the spatial dimensions
  InsertDense,      ///< no Dense feeds the output head, or it is too wide
  InsertReducing,   ///< parameter budget exceeded: pool before the first Dense
};

std::string_view to_string(RepairRule rule);

struct RepairReport {
  std::vector<RepairRule> rules_applied;
  std::size_t instructions_inserted = 0;
  std::size_t instructions_removed = 0;

  bool empty() const { return rules_applied.empty(); }
  friend bool operator==(const RepairReport&, const RepairReport&) = default;
};

struct RepairConfig {
  int num_classes = 3;
  std::int64_t max_flatten = 4096;
  std::int64_t max_params = 2'000'000;
  GenomeConfig genome;
};

struct RepairResult {
  Genome genome;
  RepairReport report;
};

/// Total: always returns a genome whose decoded chain starts with a Conv, ends
/// with a Dense, shape-propagates on `input_shape` and stays within
/// `cfg.max_params`. Only effective code is edited; the input's introns survive
/// verbatim and stay non-effective.
RepairResult repair(const Genome& g, const TensorShape& input_shape,
                    const RepairConfig& cfg = RepairConfig{});

/// True when repair would leave `g` unchanged.
bool is_compilable(const Genome& g, const TensorShape& input_shape,
                   const RepairConfig& cfg = RepairConfig{});

/// Removes the effective instruction at `chain_pos` (index into
/// effective_indices) while keeping the chain connected and every intron
/// non-effective. Register fields of effective instructions may be rewritten.
Genome remove_effective(const Genome& g, std::size_t chain_pos, int registers = 12);

}  // namespace nlgp
