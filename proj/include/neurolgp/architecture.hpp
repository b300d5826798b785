#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nlgp {

enum class LayerKind : std::uint8_t { Conv, MaxPool, BatchNorm, Dropout, Dense };

std::string_view to_string(LayerKind kind);

/// One catalogued layer. Only the fields relevant to `kind` are meaningful;
/// Dense carries no width because the width is derived from its input size.
struct LayerOp {
  LayerKind kind = LayerKind::Conv;
  int filters = 0;
  int kernel = 0;
  int pool = 0;
  double rate = 0.0;

  friend bool operator==(const LayerOp&, const LayerOp&) = default;

  static LayerOp conv(int filters, int kernel) { return {LayerKind::Conv, filters, kernel, 0, 0.0}; }
  static LayerOp max_pool(int pool) { return {LayerKind::MaxPool, 0, 0, pool, 0.0}; }
  static LayerOp batch_norm() { return {LayerKind::BatchNorm, 0, 0, 0, 0.0}; }
  static LayerOp dropout(double rate) { return {LayerKind::Dropout, 0, 0, 0, rate}; }
  static LayerOp dense() { return {LayerKind::Dense, 0, 0, 0, 0.0}; }

  bool reduces_data() const { return kind == LayerKind::MaxPool; }
};

/// Canonical textual name, e.g. "Conv16k5", "MaxPool3", "Dropout25".
std::string layer_name(const LayerOp& op);

/// Closed, indexable set of layer operations available to genomes.
class Catalogue {
 public:
  Catalogue() = default;
  explicit Catalogue(std::vector<LayerOp> ops);

  /// Conv {8,16,32}x{3,5}, MaxPool {2,3}, BatchNorm, Dropout {0.25,0.5}, Dense.
  static const Catalogue& standard();

  std::size_t size() const { return ops_.size(); }
  const LayerOp& operator[](std::size_t i) const { return ops_.at(i); }
  const std::vector<LayerOp>& ops() const { return ops_; }

  std::optional<int> find(const LayerOp& op) const;
  /// Looks up a canonical name or one of the short aliases used in hand-written
  /// listings ("Conv", "MaxPool", "Dropout").
  std::optional<int> find(std::string_view name) const;

  int smallest_conv() const;
  int smallest_pool() const;
  int dense() const;

 private:
  std::vector<LayerOp> ops_;
};

struct TensorShape {
  int height = 1;
  int width = 1;
  int channels = 1;

  friend bool operator==(const TensorShape&, const TensorShape&) = default;

  std::int64_t size() const {
    return static_cast<std::int64_t>(height) * width * channels;
  }
  std::string str() const;
};

/// Parses "16x16x1" style strings.
std::optional<TensorShape> parse_shape(std::string_view text);

/// The decoded effective chain of a genome. A softmax head of width
/// `num_classes` follows the last layer when the architecture is compiled.
struct ArchitectureDescriptor {
  std::vector<LayerOp> layers;
  TensorShape input;
  int num_classes = 3;

  friend bool operator==(const ArchitectureDescriptor&, const ArchitectureDescriptor&) = default;
};

std::string describe(const ArchitectureDescriptor& arch);

}  // namespace nlgp
