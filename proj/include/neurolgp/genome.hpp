#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "neurolgp/architecture.hpp"
#include "neurolgp/rng.hpp"

namespace nlgp {

/// `r[dest] := catalogue[op](r[src])`
struct Instruction {
  int dest = 0;
  int op = 0;
  int src = 0;

  friend auto operator<=>(const Instruction&, const Instruction&) = default;
};

/// Register 0 is the output register. Every register initially holds the
/// raw input tensor.
struct Genome {
  std::vector<Instruction> instructions;

  std::size_t size() const { return instructions.size(); }
  friend bool operator==(const Genome&, const Genome&) = default;
};

struct GenomeConfig {
  int registers = 12;
  std::size_t min_length = 1;
  std::size_t max_length = 15;
  Catalogue catalogue = Catalogue::standard();

  void validate() const;
};

/// Indices of the instructions on the backward dataflow trace from the last
/// write to register 0, in program order. Empty if nothing writes register 0.
std::vector<std::size_t> effective_indices(const Genome& g);

/// Instructions not in `effective_indices(g)`, in program order.
std::vector<Instruction> introns(const Genome& g);

Genome strip_introns(const Genome& g);

/// Throws EmptyEffectiveCode when no instruction reaches register 0. Shapes are
/// not checked here; see propagate_shape.
ArchitectureDescriptor decode(const Genome& g, const TensorShape& input_shape,
                              int num_classes = 3,
                              const GenomeConfig& cfg = GenomeConfig{});

/// Catalogue ops of the effective chain, in execution order.
std::vector<int> effective_ops(const Genome& g);

Genome random_genome(Rng& rng, const GenomeConfig& cfg = GenomeConfig{});

bool is_valid(const Genome& g, const GenomeConfig& cfg = GenomeConfig{});

std::string format_instruction(const Instruction& ins, const Catalogue& cat);

/// One `r[d] := Op(r[s])` line per instruction. With `annotate`, introns are
/// emitted as `// `-prefixed lines, which from_text reads back as instructions.
std::string to_text(const Genome& g, const GenomeConfig& cfg = GenomeConfig{},
                    bool annotate = false);

/// Blank lines and lines starting with '#' are skipped. Throws ParseError.
Genome from_text(std::string_view text, const GenomeConfig& cfg = GenomeConfig{});

}  // namespace nlgp
