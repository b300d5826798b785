#include "neurolgp/repair.hpp"

#include <optional>
#include <stdexcept>

#include "neurolgp/errors.hpp"
#include "neurolgp/nn/shape.hpp"

namespace nlgp {

std::string_view to_string(RepairRule rule) {
  switch (rule) {
    case RepairRule::InsertConvEmpty: return "InsertConvEmpty";
    case RepairRule::PrependConv: return "PrependConv";
    case RepairRule::RemoveReducing: return "RemoveReducing";
    case RepairRule::InsertDense: return "InsertDense";
    case RepairRule::InsertReducing: return "InsertReducing";
  }
  return "?";
}

namespace {

void insert_at(Genome& g, std::size_t pos, Instruction ins) {
  g.instructions.insert(g.instructions.begin() + static_cast<std::ptrdiff_t>(pos), ins);
}

// Chain with every layer on r[0], reading the raw input from `input_reg`.
std::vector<Instruction> contiguous_block(const std::vector<int>& ops, int input_reg) {
  std::vector<Instruction> block;
  for (std::size_t t = 0; t < ops.size(); ++t)
    block.push_back({0, ops[t], t == 0 ? input_reg : 0});
  return block;
}

}  // namespace

Genome remove_effective(const Genome& g, std::size_t chain_pos, int registers) {
  const auto eff = effective_indices(g);
  if (chain_pos >= eff.size()) throw std::out_of_range("chain position outside effective code");
  const std::size_t k = eff.size();

  std::vector<int> desired;
  for (std::size_t t = 0; t < k; ++t)
    if (t != chain_pos) desired.push_back(g.instructions[eff[t]].op);
  const auto kept_introns = introns(g);

  auto accepted = [&](const Genome& c) {
    return effective_ops(c) == desired && introns(c) == kept_introns;
  };

  // Vacate chain slot v: the remaining ops slide into the other slots so that
  // only the link across v has to be rewired.
  auto try_vacate = [&](std::size_t v) -> std::optional<Genome> {
    Genome base = g;
    std::size_t t = 0;
    for (std::size_t s = 0; s < k; ++s)
      if (s != v) base.instructions[eff[s]].op = desired[t++];
    auto at = [&](std::size_t s) { return eff[s] > eff[v] ? eff[s] - 1 : eff[s]; };
    const Instruction vacated = g.instructions[eff[v]];
    base.instructions.erase(base.instructions.begin() + static_cast<std::ptrdiff_t>(eff[v]));

    std::vector<Genome> options;
    if (k == 1) {
      options.push_back(base);
    } else if (v == k - 1) {
      Genome c = base;
      c.instructions[at(v - 1)].dest = 0;
      options.push_back(c);
    } else if (v == 0) {
      for (int r = 0; r < registers; ++r) {
        Genome c = base;
        c.instructions[at(1)].src = r;
        options.push_back(c);
      }
    } else {
      Genome a = base;
      a.instructions[at(v + 1)].src = vacated.src;
      options.push_back(a);
      Genome b = base;
      b.instructions[at(v - 1)].dest = vacated.dest;
      options.push_back(b);
    }
    for (auto& c : options)
      if (accepted(c)) return c;
    return std::nullopt;
  };

  if (auto c = try_vacate(chain_pos)) return *c;
  for (std::size_t v = chain_pos + 1; v < k; ++v)
    if (auto c = try_vacate(v)) return *c;
  for (std::size_t v = chain_pos; v-- > 0;)
    if (auto c = try_vacate(v)) return *c;

  // Relocate the whole chain as one contiguous block between two introns.
  if (!desired.empty()) {
    for (std::size_t slot = kept_introns.size() + 1; slot-- > 0;) {
      for (int r = 0; r < registers; ++r) {
        Genome c;
        c.instructions.assign(kept_introns.begin(),
                              kept_introns.begin() + static_cast<std::ptrdiff_t>(slot));
        for (const auto& ins : contiguous_block(desired, r)) c.instructions.push_back(ins);
        c.instructions.insert(c.instructions.end(),
                              kept_introns.begin() + static_cast<std::ptrdiff_t>(slot),
                              kept_introns.end());
        if (accepted(c)) return c;
      }
    }
  }

  // Only reachable when introns write every register; keep the chain alone.
  Genome c;
  c.instructions = contiguous_block(desired, 1);
  return c;
}

RepairResult repair(const Genome& g, const TensorShape& input_shape, const RepairConfig& cfg) {
  const auto& cat = cfg.genome.catalogue;
  const int conv = cat.smallest_conv();
  const int dense = cat.dense();
  RepairResult res{g, {}};
  Genome& out = res.genome;
  RepairReport& rep = res.report;

  auto eff = effective_indices(out);
  if (eff.empty()) {
    insert_at(out, 0, {0, conv, 1});
    rep.rules_applied.push_back(RepairRule::InsertConvEmpty);
    ++rep.instructions_inserted;
    eff = effective_indices(out);
  }

  const Instruction first = out.instructions[eff.front()];
  if (cat[static_cast<std::size_t>(first.op)].kind != LayerKind::Conv) {
    // The first effective instruction reads the raw input from first.src, so
    // a Conv that overwrites that register in place stays on the chain.
    insert_at(out, eff.front(), {first.src, conv, first.src});
    rep.rules_applied.push_back(RepairRule::PrependConv);
    ++rep.instructions_inserted;
  }

  auto arch = decode(out, input_shape, cfg.num_classes, cfg.genome);
  std::vector<TensorShape> shapes;
  for (;;) {
    try {
      shapes = propagate_shape(arch);
      break;
    } catch (const ShapeExhausted&) {
      std::size_t victim = arch.layers.size();
      for (std::size_t i = arch.layers.size(); i-- > 0;) {
        if (arch.layers[i].reduces_data()) {
          victim = i;
          break;
        }
      }
      out = remove_effective(out, victim, cfg.genome.registers);
      rep.rules_applied.push_back(RepairRule::RemoveReducing);
      ++rep.instructions_removed;
      arch = decode(out, input_shape, cfg.num_classes, cfg.genome);
    }
  }

  if (arch.layers.back().kind != LayerKind::Dense || shapes.back().size() > cfg.max_flatten) {
    // The last write to r[0] ends the chain, so a Dense appended in place on
    // r[0] extends it.
    out.instructions.push_back({0, dense, 0});
    rep.rules_applied.push_back(RepairRule::InsertDense);
    ++rep.instructions_inserted;
    arch = decode(out, input_shape, cfg.num_classes, cfg.genome);
    shapes = propagate_shape(arch);
  }

  const int pool = cat.smallest_pool();
  const int window = cat[static_cast<std::size_t>(pool)].pool;
  while (param_count(arch) > cfg.max_params) {
    eff = effective_indices(out);
    std::size_t j = 0;
    while (arch.layers[j].kind != LayerKind::Dense) ++j;
    const TensorShape in = j == 0 ? input_shape : shapes[j - 1];
    if (in.height < window || in.width < window) break;
    const int reg = out.instructions[eff[j]].src;
    insert_at(out, eff[j], {reg, pool, reg});
    rep.rules_applied.push_back(RepairRule::InsertReducing);
    ++rep.instructions_inserted;
    arch = decode(out, input_shape, cfg.num_classes, cfg.genome);
    shapes = propagate_shape(arch);
  }
  return res;
}

bool is_compilable(const Genome& g, const TensorShape& input_shape, const RepairConfig& cfg) {
  return repair(g, input_shape, cfg).report.empty();
}

}  // namespace nlgp
