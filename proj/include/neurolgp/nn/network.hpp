#pragma once

#include <cstddef>
#include <cstdint>
#include <new>
#include <span>
#include <variant>
#include <vector>

#include "neurolgp/architecture.hpp"
#include "neurolgp/rng.hpp"

namespace nlgp::nn {

/// 64-byte aligned storage. Vectorised reductions peel a prefix whose length
/// depends on the start address, so unaligned buffers would make results vary
/// from one allocation to the next.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

/// Batch of NHWC tensors; a flat feature vector is 1x1xC.
struct Tensor {
  int n = 0, h = 1, w = 1, c = 1;
  Buffer data;

  Tensor() = default;
  Tensor(int n_, int h_, int w_, int c_)
      : n(n_), h(h_), w(w_), c(c_), data(static_cast<std::size_t>(n_) * h_ * w_ * c_, 0.0) {}

  std::size_t per_sample() const { return static_cast<std::size_t>(h) * w * c; }
  std::size_t size() const { return data.size(); }
  void resize(int n_, int h_, int w_, int c_) {
    n = n_, h = h_, w = w_, c = c_;
    data.assign(static_cast<std::size_t>(n_) * h_ * w_ * c_, 0.0);
  }
};

/// Trainable parameters of one layer alongside their gradient buffer.
struct ParamView {
  std::span<double> value;
  std::span<double> grad;
};

/// Same-padding, stride-1 convolution followed by ReLU.
class Conv {
 public:
  Conv(int filters, int kernel, const TensorShape& in, Rng& init);
  void infer(const Tensor& x, Tensor& y) const;
  void forward(const Tensor& x, Tensor& y);
  void backward(const Tensor& dy, Tensor* dx);
  std::vector<ParamView> params();
  std::vector<double> state() const { return {}; }
  void set_state(std::span<const double>) {}

 private:
  void im2col(const double* x, double* cols) const;
  void col2im(const double* cols, double* dx) const;
  void apply(const Tensor& x, Tensor& y) const;

  int filters_, kernel_, pad_;
  TensorShape in_;
  Buffer weight_, bias_, gweight_, gbias_;
  Tensor x_cache_, y_cache_;
};

/// Non-overlapping max pooling (stride = window, valid padding).
class MaxPool {
 public:
  MaxPool(int pool, const TensorShape& in);
  void infer(const Tensor& x, Tensor& y) const;
  void forward(const Tensor& x, Tensor& y);
  void backward(const Tensor& dy, Tensor* dx);
  std::vector<ParamView> params() { return {}; }
  std::vector<double> state() const { return {}; }
  void set_state(std::span<const double>) {}

 private:
  void apply(const Tensor& x, Tensor& y, std::vector<std::size_t>* arg) const;
  int pool_;
  TensorShape in_;
  std::vector<std::size_t> argmax_;
};

/// Per-channel batch normalisation; inference uses running statistics.
class BatchNorm {
 public:
  static constexpr double kMomentum = 0.9;
  static constexpr double kEpsilon = 1e-5;

  explicit BatchNorm(const TensorShape& in);
  void infer(const Tensor& x, Tensor& y) const;
  void forward(const Tensor& x, Tensor& y);
  void backward(const Tensor& dy, Tensor* dx);
  std::vector<ParamView> params();
  std::vector<double> state() const;
  void set_state(std::span<const double> s);

 private:
  int channels_;
  Buffer gamma_, beta_, ggamma_, gbeta_;
  Buffer running_mean_, running_var_;
  Buffer xhat_, inv_std_;
};

/// Inverted dropout.
class Dropout {
 public:
  Dropout(double rate, const TensorShape& in);
  void infer(const Tensor& x, Tensor& y) const { y = x; }
  void forward(const Tensor& x, Tensor& y, Rng& rng);
  void backward(const Tensor& dy, Tensor* dx);
  std::vector<ParamView> params() { return {}; }
  std::vector<double> state() const { return {}; }
  void set_state(std::span<const double>) {}

 private:
  double rate_;
  Buffer mask_;
};

/// Fully connected layer on the flattened input; ReLU unless it is the head.
class Dense {
 public:
  Dense(int width, const TensorShape& in, bool relu, Rng& init);
  void infer(const Tensor& x, Tensor& y) const;
  void forward(const Tensor& x, Tensor& y);
  void backward(const Tensor& dy, Tensor* dx);
  std::vector<ParamView> params();
  std::vector<double> state() const { return {}; }
  void set_state(std::span<const double>) {}

 private:
  void apply(const Tensor& x, Tensor& y) const;
  int in_features_, width_;
  bool relu_;
  TensorShape in_;
  Buffer weight_, bias_, gweight_, gbias_;
  Tensor x_cache_, y_cache_;
};

using Layer = std::variant<Conv, MaxPool, BatchNorm, Dropout, Dense>;

/// Compiled architecture: genome layers followed by a linear head whose
/// logits feed softmax cross-entropy.
class Network {
 public:
  Network(const ArchitectureDescriptor& arch, Rng& init);

  /// Logits without touching training caches or running statistics.
  Tensor infer(const Tensor& x) const;
  /// Training-mode forward pass; caches activations for backward.
  Tensor forward(const Tensor& x, Rng& rng);
  /// Accumulates parameter gradients from d(loss)/d(logits); returns
  /// d(loss)/d(input) when `input_grad` is set.
  Tensor backward(const Tensor& dlogits, bool input_grad = false);

  void zero_grad();
  std::vector<ParamView> params();
  std::size_t param_count() const { return param_count_; }
  /// All trainable parameters flattened in params() order.
  std::vector<double> weights() const;
  void set_weights(std::span<const double> w);

  /// Running statistics of every BatchNorm layer, flattened.
  std::vector<double> state() const;
  void set_state(std::span<const double> s);

  const ArchitectureDescriptor& arch() const { return arch_; }
  std::size_t num_layers() const { return layers_.size(); }

 private:
  ArchitectureDescriptor arch_;
  std::vector<Layer> layers_;
  std::size_t param_count_ = 0;
};

/// Mean softmax cross-entropy over the batch; writes d(loss)/d(logits).
double softmax_cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor* dlogits);

/// Row-wise softmax of a logits batch (n x classes).
std::vector<double> softmax(const Tensor& logits);

}  // namespace nlgp::nn
