#include "neurolgp/variation.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "neurolgp/errors.hpp"

namespace nlgp {

void VariationConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_mut_register) || !prob(p_mut_operand) || !prob(p_mutation) || !prob(p_crossover))
    throw ConfigError("variation probabilities must lie in [0, 1]");
  if (p_mut_register + p_mut_operand <= 0.0)
    throw ConfigError("mutation field weights must not both be zero");
  if (tournament_size < 2) throw ConfigError("tournament_size must be >= 2");
}

namespace {

int redraw(int current, int range, Rng& rng) {
  if (range < 2) return current;
  const int v = static_cast<int>(rng.uniform_int(0, range - 2));
  return v >= current ? v + 1 : v;
}

}  // namespace

Genome mutate(const Genome& g, Rng& rng, const VariationConfig& vcfg, const GenomeConfig& gcfg,
              std::optional<MutationField> force, MutationSite* site) {
  if (g.instructions.empty()) throw std::invalid_argument("cannot mutate an empty genome");
  Genome out = g;
  const std::size_t i = rng.index(out.size());
  MutationField field;
  if (force) {
    field = *force;
  } else {
    const double total = vcfg.p_mut_register + vcfg.p_mut_operand;
    const double u = rng.uniform() * total;
    if (u < vcfg.p_mut_register / 2)
      field = MutationField::Dest;
    else if (u < vcfg.p_mut_register)
      field = MutationField::Src;
    else
      field = MutationField::Operand;
  }
  auto& ins = out.instructions[i];
  switch (field) {
    case MutationField::Dest: ins.dest = redraw(ins.dest, gcfg.registers, rng); break;
    case MutationField::Src: ins.src = redraw(ins.src, gcfg.registers, rng); break;
    case MutationField::Operand:
      ins.op = redraw(ins.op, static_cast<int>(gcfg.catalogue.size()), rng);
      break;
  }
  if (site) *site = {i, field};
  return out;
}

std::pair<Genome, Genome> crossover_at(const Genome& a, const Genome& b,
                                       const CrossoverPoints& p) {
  if (p.a_begin > p.a_end || p.b_begin > p.b_end || p.a_end >= a.size() || p.b_end >= b.size())
    throw std::out_of_range("crossover points outside parents");

  auto child = [](const Genome& host, std::size_t hb, std::size_t he, const Genome& donor,
                  std::size_t db, std::size_t de) {
    Genome c;
    const auto& h = host.instructions;
    const auto& d = donor.instructions;
    c.instructions.reserve(h.size() - (he - hb + 1) + (de - db + 1));
    c.instructions.insert(c.instructions.end(), h.begin(), h.begin() + static_cast<std::ptrdiff_t>(hb));
    const std::size_t seg_first = c.instructions.size();
    c.instructions.insert(c.instructions.end(), d.begin() + static_cast<std::ptrdiff_t>(db),
                          d.begin() + static_cast<std::ptrdiff_t>(de) + 1);
    const std::size_t seg_last = c.instructions.size() - 1;
    c.instructions.insert(c.instructions.end(), h.begin() + static_cast<std::ptrdiff_t>(he) + 1,
                          h.end());
    // Junction repair: the segment's head reads what the host's segment head
    // read; its tail writes where the host's segment tail wrote.
    c.instructions[seg_first].src = h[hb].src;
    c.instructions[seg_last].dest = h[he].dest;
    return c;
  };

  return {child(a, p.a_begin, p.a_end, b, p.b_begin, p.b_end),
          child(b, p.b_begin, p.b_end, a, p.a_begin, p.a_end)};
}

std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Rng& rng,
                                    CrossoverPoints* chosen) {
  const auto ea = effective_indices(a);
  const auto eb = effective_indices(b);
  if (ea.empty() || eb.empty())
    throw std::invalid_argument("crossover parents need effective code");
  auto pick = [&rng](const std::vector<std::size_t>& eff) {
    std::size_t x = rng.index(eff.size());
    std::size_t y = rng.index(eff.size());
    if (x > y) std::swap(x, y);
    return std::pair{eff[x], eff[y]};
  };
  CrossoverPoints p;
  std::tie(p.a_begin, p.a_end) = pick(ea);
  std::tie(p.b_begin, p.b_end) = pick(eb);
  if (chosen) *chosen = p;
  return crossover_at(a, b, p);
}

Genome truncate(const Genome& g, std::size_t max_length) {
  Genome out = g;
  if (out.instructions.size() > max_length) out.instructions.resize(max_length);
  return out;
}

bool beats(const Contender& a, std::size_t ia, const Contender& b, std::size_t ib) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  if (a.param_count != b.param_count) return a.param_count < b.param_count;
  return ia < ib;
}

std::size_t tournament(std::span<const Contender> pop, std::size_t k, Rng& rng) {
  if (pop.empty()) throw std::invalid_argument("tournament over an empty population");
  k = std::min(k, pop.size());
  // Partial Fisher-Yates: k distinct contenders.
  std::vector<std::size_t> idx(pop.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::size_t best = 0;
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t j = t + rng.index(idx.size() - t);
    std::swap(idx[t], idx[j]);
    const std::size_t c = idx[t];
    if (t == 0 || beats(pop[c], c, pop[best], best)) best = c;
  }
  return best;
}

std::pair<std::size_t, std::size_t> select_parents(std::span<const Contender> pop, Rng& rng,
                                                   const VariationConfig& cfg) {
  const std::size_t first = tournament(pop, cfg.tournament_size, rng);
  const std::size_t second = tournament(pop, cfg.tournament_size, rng);
  return {first, second};
}

}  // namespace nlgp
