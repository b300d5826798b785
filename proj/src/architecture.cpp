#include "neurolgp/architecture.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace nlgp {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "Conv";
    case LayerKind::MaxPool: return "MaxPool";
    case LayerKind::BatchNorm: return "BatchNorm";
    case LayerKind::Dropout: return "Dropout";
    case LayerKind::Dense: return "Dense";
  }
  return "?";
}

std::string layer_name(const LayerOp& op) {
  switch (op.kind) {
    case LayerKind::Conv:
      return "Conv" + std::to_string(op.filters) + "k" + std::to_string(op.kernel);
    case LayerKind::MaxPool:
      return "MaxPool" + std::to_string(op.pool);
    case LayerKind::BatchNorm:
      return "BatchNorm";
    case LayerKind::Dropout:
      return "Dropout" + std::to_string(static_cast<int>(std::lround(op.rate * 100)));
    case LayerKind::Dense:
      return "Dense";
  }
  return "?";
}

Catalogue::Catalogue(std::vector<LayerOp> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw std::invalid_argument("empty layer catalogue");
}

const Catalogue& Catalogue::standard() {
  static const Catalogue cat({
      LayerOp::conv(8, 3), LayerOp::conv(8, 5), LayerOp::conv(16, 3),
      LayerOp::conv(16, 5), LayerOp::conv(32, 3), LayerOp::conv(32, 5),
      LayerOp::max_pool(2), LayerOp::max_pool(3), LayerOp::batch_norm(),
      LayerOp::dropout(0.25), LayerOp::dropout(0.5), LayerOp::dense(),
  });
  return cat;
}

std::optional<int> Catalogue::find(const LayerOp& op) const {
  for (std::size_t i = 0; i < ops_.size(); ++i)
    if (ops_[i] == op) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> Catalogue::find(std::string_view name) const {
  for (std::size_t i = 0; i < ops_.size(); ++i)
    if (layer_name(ops_[i]) == name) return static_cast<int>(i);
  // Aliases follow the hand-written listing style: Conv2D(32, 3), MaxPooling2D(3).
  std::optional<LayerOp> alias;
  if (name == "Conv") alias = LayerOp::conv(32, 3);
  if (name == "MaxPool") alias = LayerOp::max_pool(3);
  if (name == "Dropout") alias = LayerOp::dropout(0.5);
  if (alias) return find(*alias);
  return std::nullopt;
}

namespace {

template <class Key>
int argmin_kind(const std::vector<LayerOp>& ops, LayerKind kind, Key key) {
  int best = -1;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].kind != kind) continue;
    if (best < 0 || key(ops[i]) < key(ops[static_cast<std::size_t>(best)]))
      best = static_cast<int>(i);
  }
  if (best < 0)
    throw std::logic_error("catalogue lacks a " + std::string(to_string(kind)) + " layer");
  return best;
}

}  // namespace

int Catalogue::smallest_conv() const {
  return argmin_kind(ops_, LayerKind::Conv,
                     [](const LayerOp& o) { return std::tuple(o.filters, o.kernel); });
}

int Catalogue::smallest_pool() const {
  return argmin_kind(ops_, LayerKind::MaxPool, [](const LayerOp& o) { return o.pool; });
}

int Catalogue::dense() const {
  return argmin_kind(ops_, LayerKind::Dense, [](const LayerOp&) { return 0; });
}

std::string TensorShape::str() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
}

std::optional<TensorShape> parse_shape(std::string_view text) {
  int dims[3];
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 3; ++i) {
    auto [next, ec] = std::from_chars(p, end, dims[i]);
    if (ec != std::errc{} || dims[i] < 1) return std::nullopt;
    p = next;
    if (i < 2) {
      if (p == end || (*p != 'x' && *p != 'X')) return std::nullopt;
      ++p;
    }
  }
  if (p != end) return std::nullopt;
  return TensorShape{dims[0], dims[1], dims[2]};
}

std::string describe(const ArchitectureDescriptor& arch) {
  std::string out;
  for (const auto& op : arch.layers) {
    if (!out.empty()) out += " -> ";
    out += layer_name(op);
  }
  return out;
}

}  // namespace nlgp
