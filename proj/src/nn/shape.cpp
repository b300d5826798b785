#include "neurolgp/nn/shape.hpp"

#include <algorithm>
#include <numeric>

#include "neurolgp/errors.hpp"

namespace nlgp {

int dense_width(std::int64_t flatten_size) {
  return static_cast<int>(std::clamp<std::int64_t>(flatten_size / 8, 16, 128));
}

std::vector<TensorShape> propagate_shape(const ArchitectureDescriptor& arch) {
  std::vector<TensorShape> shapes;
  shapes.reserve(arch.layers.size());
  TensorShape cur = arch.input;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& op = arch.layers[i];
    switch (op.kind) {
      case LayerKind::Conv:
        cur.channels = op.filters;
        break;
      case LayerKind::MaxPool:
        if (cur.height < op.pool || cur.width < op.pool)
          throw ShapeExhausted(i, "MaxPool" + std::to_string(op.pool) + " at layer " +
                                      std::to_string(i) + " on " + cur.str());
        cur.height /= op.pool;
        cur.width /= op.pool;
        break;
      case LayerKind::BatchNorm:
      case LayerKind::Dropout:
        break;
      case LayerKind::Dense:
        cur = TensorShape{1, 1, dense_width(cur.size())};
        break;
    }
    shapes.push_back(cur);
  }
  return shapes;
}

std::vector<std::int64_t> layer_param_counts(const ArchitectureDescriptor& arch) {
  const auto shapes = propagate_shape(arch);
  std::vector<std::int64_t> counts;
  counts.reserve(arch.layers.size() + 1);
  TensorShape in = arch.input;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& op = arch.layers[i];
    const auto& out = shapes[i];
    std::int64_t n = 0;
    switch (op.kind) {
      case LayerKind::Conv:
        n = static_cast<std::int64_t>(op.filters) *
            (static_cast<std::int64_t>(op.kernel) * op.kernel * in.channels + 1);
        break;
      case LayerKind::BatchNorm:
        n = 2 * static_cast<std::int64_t>(in.channels);
        break;
      case LayerKind::Dense:
        n = static_cast<std::int64_t>(out.channels) * (in.size() + 1);
        break;
      case LayerKind::MaxPool:
      case LayerKind::Dropout:
        break;
    }
    counts.push_back(n);
    in = out;
  }
  counts.push_back(static_cast<std::int64_t>(arch.num_classes) * (in.size() + 1));
  return counts;
}

std::int64_t param_count(const ArchitectureDescriptor& arch) {
  const auto counts = layer_param_counts(arch);
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

}  // namespace nlgp
