#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include "neurolgp/genome.hpp"
#include "neurolgp/rng.hpp"

namespace nlgp {

struct VariationConfig {
  /// Weight of the two register fields (split evenly between dest and src)
  /// against the operand when a mutation picks which field to change.
  double p_mut_register = 2.0 / 3.0;
  double p_mut_operand = 1.0 / 3.0;
  /// Probability an offspring is mutated after crossover/copy.
  double p_mutation = 0.5;
  double p_crossover = 0.8;
  std::size_t tournament_size = 3;
  std::size_t elitism = 1;

  void validate() const;
};

enum class MutationField : std::uint8_t { Dest, Src, Operand };

struct MutationSite {
  std::size_t instruction = 0;
  MutationField field = MutationField::Operand;
};

/// Point mutation: one instruction (effective or not) has one field redrawn
/// uniformly among the values it does not currently hold.
Genome mutate(const Genome& g, Rng& rng, const VariationConfig& vcfg = VariationConfig{},
              const GenomeConfig& gcfg = GenomeConfig{},
              std::optional<MutationField> force = std::nullopt,
              MutationSite* site = nullptr);

struct CrossoverPoints {
  std::size_t a_begin = 0, a_end = 0;  ///< inclusive instruction indices in parent a
  std::size_t b_begin = 0, b_end = 0;
};

/// Exchanges the segments [a_begin, a_end] and [b_begin, b_end]. All four
/// bounds must be effective positions of their parent. The incoming segment's
/// first instruction is rewired to read what the replaced segment read, and its
/// last instruction to write what the replaced segment wrote, so each child's
/// chain stays connected through the junctions.
std::pair<Genome, Genome> crossover_at(const Genome& a, const Genome& b,
                                       const CrossoverPoints& pts);

/// Effective crossover with points drawn uniformly from each parent's
/// effective positions. Offspring length is not bounded here.
std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Rng& rng,
                                    CrossoverPoints* chosen = nullptr);

/// Keeps the first `max_length` instructions.
Genome truncate(const Genome& g, std::size_t max_length);

struct Contender {
  double fitness = 0.0;
  std::int64_t param_count = 0;
};

/// Size-`k` tournament over distinct contenders; k is capped at the population
/// size. Highest fitness wins; ties go to the smaller network, then the lower
/// index.
std::size_t tournament(std::span<const Contender> pop, std::size_t k, Rng& rng);

std::pair<std::size_t, std::size_t> select_parents(std::span<const Contender> pop, Rng& rng,
                                                   const VariationConfig& cfg);

/// True when contender `a` beats contender `b` (indices break exact ties).
bool beats(const Contender& a, std::size_t ia, const Contender& b, std::size_t ib);

}  // namespace nlgp
