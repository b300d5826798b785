#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "neurolgp/architecture.hpp"
#include "neurolgp/rng.hpp"

namespace nlgp {

/// Procedural stand-in for a histopathology image set: each class is a shape
/// (disc, square, cross) rendered at a random position, scale and rotation,
/// with additive pixel noise.
struct DataConfig {
  TensorShape shape{16, 16, 1};
  int n_classes = 3;
  int base_count = 200;      ///< images in each minority class
  double imbalance = 2.0;    ///< class 0 holds imbalance * base_count images
  double noise = 0.1;        ///< standard deviation of additive pixel noise
  double min_scale = 0.35;   ///< shape radius as a fraction of the half-width
  double max_scale = 0.6;
  double max_shift = 0.2;    ///< centre jitter as a fraction of the half-width
  double train = 0.635;
  double validation = 0.125;
  double test1 = 0.125;
  double test2 = 0.125;

  void validate() const;
  std::vector<int> class_counts() const;
};

enum class SplitId : std::uint8_t { Train = 0, Validation = 1, Test1 = 2, Test2 = 3 };

struct Dataset {
  TensorShape shape;
  int n_classes = 0;
  std::uint64_t seed = 0;
  std::vector<double> images;  ///< row-major, one image of shape.size() per sample
  std::vector<int> labels;
  std::vector<SplitId> split;  ///< split membership per sample

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(shape.size()); }
  std::vector<std::size_t> indices(SplitId id) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Pure function of (cfg, seed). Per class, round(train * n) images go to the
/// training split and the rest are dealt to validation/test1/test2 in
/// proportion to their fractions, carrying rounding across classes.
/// Throws ConfigError.
Dataset generate(const DataConfig& cfg, std::uint64_t seed);

/// Flat feature rows with labels.
struct Samples {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  const double* row(std::size_t i) const { return features.data() + i * dim; }
};

Samples select(const Dataset& ds, SplitId id);

struct SyntheticOrigin {
  std::size_t parent = 0;
  std::size_t neighbor = 0;
  double u = 0.0;
};

/// Up-samples every class to the majority count. Each synthetic row is
/// x + u (x_nn - x) with x_nn one of the k nearest same-class rows (Euclidean)
/// and u ~ U(0,1). Originals come first, unchanged. Throws InsufficientSamples
/// when a class that needs up-sampling has <= k members.
Samples smote(const Samples& in, int k, Rng& rng, std::vector<SyntheticOrigin>* origins = nullptr);

/// Training split balanced by SMOTE; evaluation splits untouched.
struct PreparedData {
  TensorShape shape;
  int n_classes = 0;
  Samples train, validation, test1, test2;
};

PreparedData prepare(const Dataset& ds, int smote_k, std::uint64_t seed);

/// Binary container: "NLGD", u32 version, i32 height/width/channels/classes,
/// u64 count, u64 seed, f64 pixels, i32 labels, u8 split ids (little endian).
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace nlgp
