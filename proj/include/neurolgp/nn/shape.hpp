#pragma once

#include <cstdint>
#include <vector>

#include "neurolgp/architecture.hpp"

namespace nlgp {

/// Width of a Dense layer fed `flatten_size` features: clamp(flatten/8, 16, 128).
int dense_width(std::int64_t flatten_size);

/// Per-layer output shapes (the softmax head is not included). Conv keeps the
/// spatial size (same padding, stride 1); MaxPool uses stride = window with
/// valid padding; Dense flattens and yields 1x1xwidth.
/// Throws ShapeExhausted when a pool window exceeds a spatial dimension.
std::vector<TensorShape> propagate_shape(const ArchitectureDescriptor& arch);

/// Trainable parameters per genome layer; the head is the extra last entry.
std::vector<std::int64_t> layer_param_counts(const ArchitectureDescriptor& arch);

/// Total trainable parameters including the softmax head.
std::int64_t param_count(const ArchitectureDescriptor& arch);

}  // namespace nlgp
