#include "neurolgp/genome.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <stdexcept>

#include "neurolgp/errors.hpp"

namespace nlgp {

void GenomeConfig::validate() const {
  if (registers < 2) throw ConfigError("register file needs at least 2 registers");
  if (min_length < 1 || min_length > max_length)
    throw ConfigError("genome length bounds must satisfy 1 <= min <= max");
  if (catalogue.size() == 0) throw ConfigError("empty catalogue");
}

std::vector<std::size_t> effective_indices(const Genome& g) {
  const auto& ins = g.instructions;
  std::vector<std::size_t> chain;
  std::size_t i = ins.size();
  int needed = 0;
  while (i > 0) {
    --i;
    if (ins[i].dest == needed) {
      chain.push_back(i);
      needed = ins[i].src;
    }
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::vector<Instruction> introns(const Genome& g) {
  const auto eff = effective_indices(g);
  std::vector<Instruction> out;
  std::size_t e = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (e < eff.size() && eff[e] == i) {
      ++e;
      continue;
    }
    out.push_back(g.instructions[i]);
  }
  return out;
}

Genome strip_introns(const Genome& g) {
  Genome out;
  for (auto i : effective_indices(g)) out.instructions.push_back(g.instructions[i]);
  return out;
}

std::vector<int> effective_ops(const Genome& g) {
  std::vector<int> ops;
  for (auto i : effective_indices(g)) ops.push_back(g.instructions[i].op);
  return ops;
}

ArchitectureDescriptor decode(const Genome& g, const TensorShape& input_shape,
                              int num_classes, const GenomeConfig& cfg) {
  const auto eff = effective_indices(g);
  if (eff.empty()) throw EmptyEffectiveCode();
  ArchitectureDescriptor arch;
  arch.input = input_shape;
  arch.num_classes = num_classes;
  arch.layers.reserve(eff.size());
  for (auto i : eff)
    arch.layers.push_back(cfg.catalogue[static_cast<std::size_t>(g.instructions[i].op)]);
  return arch;
}

Genome random_genome(Rng& rng, const GenomeConfig& cfg) {
  const auto len = static_cast<std::size_t>(rng.uniform_int(
      static_cast<std::int64_t>(cfg.min_length), static_cast<std::int64_t>(cfg.max_length)));
  Genome g;
  g.instructions.reserve(len);
  const auto last_reg = cfg.registers - 1;
  const auto last_op = static_cast<std::int64_t>(cfg.catalogue.size()) - 1;
  for (std::size_t i = 0; i < len; ++i) {
    Instruction ins;
    ins.dest = static_cast<int>(rng.uniform_int(0, last_reg));
    ins.op = static_cast<int>(rng.uniform_int(0, last_op));
    ins.src = static_cast<int>(rng.uniform_int(0, last_reg));
    g.instructions.push_back(ins);
  }
  return g;
}

bool is_valid(const Genome& g, const GenomeConfig& cfg) {
  if (g.instructions.empty()) return false;
  const auto n_ops = static_cast<int>(cfg.catalogue.size());
  return std::all_of(g.instructions.begin(), g.instructions.end(), [&](const Instruction& i) {
    return i.dest >= 0 && i.dest < cfg.registers && i.src >= 0 && i.src < cfg.registers &&
           i.op >= 0 && i.op < n_ops;
  });
}

std::string format_instruction(const Instruction& ins, const Catalogue& cat) {
  return "r[" + std::to_string(ins.dest) + "] := " +
         layer_name(cat[static_cast<std::size_t>(ins.op)]) + "(r[" + std::to_string(ins.src) +
         "])";
}

std::string to_text(const Genome& g, const GenomeConfig& cfg, bool annotate) {
  std::vector<bool> effective(g.size(), !annotate);
  if (annotate)
    for (auto i : effective_indices(g)) effective[i] = true;
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += '\n';
    if (!effective[i]) out += "// ";
    out += format_instruction(g.instructions[i], cfg.catalogue);
  }
  return out;
}

namespace {

class LineParser {
 public:
  LineParser(std::string_view s, std::size_t line) : s_(s), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }

  bool consume(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    if (!consume(tok)) fail("expected '" + std::string(tok) + "'");
  }

  int integer() {
    skip_ws();
    int v = 0;
    auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{}) fail("expected register index");
    pos_ = static_cast<std::size_t>(p - s_.data());
    return v;
  }

  std::string_view identifier() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail("expected operation name");
    return s_.substr(start, pos_ - start);
  }

  bool at_end() {
    skip_ws();
    return pos_ == s_.size();
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

Genome from_text(std::string_view text, const GenomeConfig& cfg) {
  Genome g;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    LineParser p(line, line_no);
    if (p.at_end() || p.consume("#")) continue;
    p.consume("//");

    auto reg = [&] {
      p.expect("r");
      p.expect("[");
      const int r = p.integer();
      p.expect("]");
      if (r < 0 || r >= cfg.registers)
        p.fail("register r[" + std::to_string(r) + "] out of range");
      return r;
    };

    Instruction ins;
    ins.dest = reg();
    p.expect(":=");
    const auto name = p.identifier();
    const auto op = cfg.catalogue.find(name);
    if (!op) p.fail("unknown operation '" + std::string(name) + "'");
    ins.op = *op;
    p.expect("(");
    ins.src = reg();
    p.expect(")");
    if (!p.at_end()) p.fail("trailing characters");
    g.instructions.push_back(ins);
  }
  if (g.instructions.empty()) throw ParseError(line_no, "genome has no instructions");
  return g;
}

}  // namespace nlgp
