#include "neurolgp/nn/network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <type_traits>

#include "neurolgp/errors.hpp"
#include "neurolgp/nn/shape.hpp"

namespace nlgp::nn {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;
using CMapRow = Eigen::Map<const Eigen::RowVectorXd>;
using MapRow = Eigen::Map<Eigen::RowVectorXd>;

void he_uniform(Buffer& w, std::int64_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : w) v = rng.uniform(-limit, limit);
}

}  // namespace

// ---------------------------------------------------------------- Conv

Conv::Conv(int filters, int kernel, const TensorShape& in, Rng& init)
    : filters_(filters), kernel_(kernel), pad_((kernel - 1) / 2), in_(in) {
  const auto fan_in = static_cast<std::size_t>(kernel) * kernel * in.channels;
  weight_.resize(fan_in * static_cast<std::size_t>(filters));
  he_uniform(weight_, static_cast<std::int64_t>(fan_in), init);
  bias_.assign(static_cast<std::size_t>(filters), 0.0);
  gweight_.assign(weight_.size(), 0.0);
  gbias_.assign(bias_.size(), 0.0);
}

void Conv::im2col(const double* x, double* cols) const {
  const int H = in_.height, W = in_.width, C = in_.channels, k = kernel_;
  const std::size_t K = static_cast<std::size_t>(k) * k * C;
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      double* row = cols + (static_cast<std::size_t>(i) * W + j) * K;
      for (int di = 0; di < k; ++di) {
        const int si = i + di - pad_;
        for (int dj = 0; dj < k; ++dj) {
          const int sj = j + dj - pad_;
          double* dst = row + (static_cast<std::size_t>(di) * k + dj) * C;
          if (si < 0 || si >= H || sj < 0 || sj >= W) {
            std::fill(dst, dst + C, 0.0);
          } else {
            const double* src = x + (static_cast<std::size_t>(si) * W + sj) * C;
            std::copy(src, src + C, dst);
          }
        }
      }
    }
  }
}

void Conv::col2im(const double* cols, double* dx) const {
  const int H = in_.height, W = in_.width, C = in_.channels, k = kernel_;
  const std::size_t K = static_cast<std::size_t>(k) * k * C;
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      const double* row = cols + (static_cast<std::size_t>(i) * W + j) * K;
      for (int di = 0; di < k; ++di) {
        const int si = i + di - pad_;
        if (si < 0 || si >= H) continue;
        for (int dj = 0; dj < k; ++dj) {
          const int sj = j + dj - pad_;
          if (sj < 0 || sj >= W) continue;
          const double* src = row + (static_cast<std::size_t>(di) * k + dj) * C;
          double* dst = dx + (static_cast<std::size_t>(si) * W + sj) * C;
          for (int c = 0; c < C; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

void Conv::apply(const Tensor& x, Tensor& y) const {
  const int HW = in_.height * in_.width;
  const int K = kernel_ * kernel_ * in_.channels;
  y.resize(x.n, in_.height, in_.width, filters_);
  Buffer cols(static_cast<std::size_t>(HW) * K);
  const CMapRM wm(weight_.data(), K, filters_);
  const CMapRow b(bias_.data(), filters_);
  for (int s = 0; s < x.n; ++s) {
    im2col(x.data.data() + static_cast<std::size_t>(s) * x.per_sample(), cols.data());
    MapRM out(y.data.data() + static_cast<std::size_t>(s) * y.per_sample(), HW, filters_);
    out.noalias() = CMapRM(cols.data(), HW, K) * wm;
    out.rowwise() += b;
  }
  for (auto& v : y.data) v = std::max(v, 0.0);
}

void Conv::infer(const Tensor& x, Tensor& y) const { apply(x, y); }

void Conv::forward(const Tensor& x, Tensor& y) {
  apply(x, y);
  x_cache_ = x;
  y_cache_ = y;
}

void Conv::backward(const Tensor& dy, Tensor* dx) {
  const int HW = in_.height * in_.width;
  const int K = kernel_ * kernel_ * in_.channels;
  Buffer cols(static_cast<std::size_t>(HW) * K);
  Buffer dcols(dx ? cols.size() : 0);
  MatRM dpre(HW, filters_);
  const CMapRM wm(weight_.data(), K, filters_);
  MapRM gw(gweight_.data(), K, filters_);
  MapRow gb(gbias_.data(), filters_);
  if (dx) dx->resize(x_cache_.n, x_cache_.h, x_cache_.w, x_cache_.c);
  for (int s = 0; s < x_cache_.n; ++s) {
    const std::size_t off = static_cast<std::size_t>(s) * dy.per_sample();
    const double* g = dy.data.data() + off;
    const double* out = y_cache_.data.data() + off;
    for (int r = 0; r < HW; ++r)
      for (int f = 0; f < filters_; ++f) {
        const std::size_t idx = static_cast<std::size_t>(r) * filters_ + f;
        dpre(r, f) = out[idx] > 0.0 ? g[idx] : 0.0;
      }
    im2col(x_cache_.data.data() + static_cast<std::size_t>(s) * x_cache_.per_sample(), cols.data());
    const CMapRM cm(cols.data(), HW, K);
    gw.noalias() += cm.transpose() * dpre;
    gb += dpre.colwise().sum();
    if (dx) {
      MapRM(dcols.data(), HW, K).noalias() = dpre * wm.transpose();
      col2im(dcols.data(), dx->data.data() + static_cast<std::size_t>(s) * dx->per_sample());
    }
  }
}

std::vector<ParamView> Conv::params() {
  return {{weight_, gweight_}, {bias_, gbias_}};
}

// ---------------------------------------------------------------- MaxPool

MaxPool::MaxPool(int pool, const TensorShape& in) : pool_(pool), in_(in) {}

void MaxPool::apply(const Tensor& x, Tensor& y, std::vector<std::size_t>* arg) const {
  const int p = pool_, C = x.c, W = x.w;
  const int oh = x.h / p, ow = x.w / p;
  y.resize(x.n, oh, ow, C);
  if (arg) arg->assign(y.size(), 0);
  for (int s = 0; s < x.n; ++s) {
    const std::size_t xoff = static_cast<std::size_t>(s) * x.per_sample();
    const std::size_t yoff = static_cast<std::size_t>(s) * y.per_sample();
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j)
        for (int c = 0; c < C; ++c) {
          std::size_t best = xoff + (static_cast<std::size_t>(i * p) * W + j * p) * C + c;
          for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) {
              const std::size_t idx =
                  xoff + (static_cast<std::size_t>(i * p + a) * W + (j * p + b)) * C + c;
              if (x.data[idx] > x.data[best]) best = idx;
            }
          const std::size_t o = yoff + (static_cast<std::size_t>(i) * ow + j) * C + c;
          y.data[o] = x.data[best];
          if (arg) (*arg)[o] = best;
        }
  }
}

void MaxPool::infer(const Tensor& x, Tensor& y) const { apply(x, y, nullptr); }

void MaxPool::forward(const Tensor& x, Tensor& y) {
  apply(x, y, &argmax_);
  in_ = {x.h, x.w, x.c};
}

void MaxPool::backward(const Tensor& dy, Tensor* dx) {
  if (!dx) return;
  dx->resize(dy.n, in_.height, in_.width, in_.channels);
  for (std::size_t o = 0; o < dy.size(); ++o) dx->data[argmax_[o]] += dy.data[o];
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(const TensorShape& in)
    : channels_(in.channels),
      gamma_(static_cast<std::size_t>(in.channels), 1.0),
      beta_(static_cast<std::size_t>(in.channels), 0.0),
      ggamma_(static_cast<std::size_t>(in.channels), 0.0),
      gbeta_(static_cast<std::size_t>(in.channels), 0.0),
      running_mean_(static_cast<std::size_t>(in.channels), 0.0),
      running_var_(static_cast<std::size_t>(in.channels), 1.0) {}

void BatchNorm::infer(const Tensor& x, Tensor& y) const {
  y = x;
  const std::size_t C = static_cast<std::size_t>(channels_);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t c = i % C;
    y.data[i] = gamma_[c] * (x.data[i] - running_mean_[c]) / std::sqrt(running_var_[c] + kEpsilon) +
                beta_[c];
  }
}

void BatchNorm::forward(const Tensor& x, Tensor& y) {
  const std::size_t C = static_cast<std::size_t>(channels_);
  const std::size_t M = x.size() / C;
  std::vector<double> mean(C, 0.0), var(C, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) mean[i % C] += x.data[i];
  for (auto& m : mean) m /= static_cast<double>(M);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.data[i] - mean[i % C];
    var[i % C] += d * d;
  }
  for (auto& v : var) v /= static_cast<double>(M);
  inv_std_.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    inv_std_[c] = 1.0 / std::sqrt(var[c] + kEpsilon);
    running_mean_[c] = kMomentum * running_mean_[c] + (1.0 - kMomentum) * mean[c];
    running_var_[c] = kMomentum * running_var_[c] + (1.0 - kMomentum) * var[c];
  }
  y = x;
  xhat_.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t c = i % C;
    xhat_[i] = (x.data[i] - mean[c]) * inv_std_[c];
    y.data[i] = gamma_[c] * xhat_[i] + beta_[c];
  }
}

void BatchNorm::backward(const Tensor& dy, Tensor* dx) {
  const std::size_t C = static_cast<std::size_t>(channels_);
  const std::size_t M = dy.size() / C;
  std::vector<double> sum_dxhat(C, 0.0), sum_dxhat_xhat(C, 0.0);
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const std::size_t c = i % C;
    ggamma_[c] += dy.data[i] * xhat_[i];
    gbeta_[c] += dy.data[i];
    const double dxhat = dy.data[i] * gamma_[c];
    sum_dxhat[c] += dxhat;
    sum_dxhat_xhat[c] += dxhat * xhat_[i];
  }
  if (!dx) return;
  *dx = dy;
  const double Md = static_cast<double>(M);
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const std::size_t c = i % C;
    const double dxhat = dy.data[i] * gamma_[c];
    dx->data[i] = inv_std_[c] / Md * (Md * dxhat - sum_dxhat[c] - xhat_[i] * sum_dxhat_xhat[c]);
  }
}

std::vector<ParamView> BatchNorm::params() { return {{gamma_, ggamma_}, {beta_, gbeta_}}; }

std::vector<double> BatchNorm::state() const {
  std::vector<double> s(running_mean_.begin(), running_mean_.end());
  s.insert(s.end(), running_var_.begin(), running_var_.end());
  return s;
}

void BatchNorm::set_state(std::span<const double> s) {
  const std::size_t C = static_cast<std::size_t>(channels_);
  std::copy(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(C), running_mean_.begin());
  std::copy(s.begin() + static_cast<std::ptrdiff_t>(C), s.begin() + static_cast<std::ptrdiff_t>(2 * C),
            running_var_.begin());
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double rate, const TensorShape&) : rate_(rate) {}

void Dropout::forward(const Tensor& x, Tensor& y, Rng& rng) {
  y = x;
  mask_.resize(x.size());
  const double keep = 1.0 - rate_;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask_[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
    y.data[i] *= mask_[i];
  }
}

void Dropout::backward(const Tensor& dy, Tensor* dx) {
  if (!dx) return;
  *dx = dy;
  for (std::size_t i = 0; i < dy.size(); ++i) dx->data[i] *= mask_[i];
}

// ---------------------------------------------------------------- Dense

Dense::Dense(int width, const TensorShape& in, bool relu, Rng& init)
    : in_features_(static_cast<int>(in.size())), width_(width), relu_(relu), in_(in) {
  weight_.resize(static_cast<std::size_t>(in_features_) * static_cast<std::size_t>(width));
  he_uniform(weight_, in_features_, init);
  bias_.assign(static_cast<std::size_t>(width), 0.0);
  gweight_.assign(weight_.size(), 0.0);
  gbias_.assign(bias_.size(), 0.0);
}

void Dense::apply(const Tensor& x, Tensor& y) const {
  y.resize(x.n, 1, 1, width_);
  MapRM out(y.data.data(), x.n, width_);
  out.noalias() = CMapRM(x.data.data(), x.n, in_features_) * CMapRM(weight_.data(), in_features_, width_);
  out.rowwise() += CMapRow(bias_.data(), width_);
  if (relu_)
    for (auto& v : y.data) v = std::max(v, 0.0);
}

void Dense::infer(const Tensor& x, Tensor& y) const { apply(x, y); }

void Dense::forward(const Tensor& x, Tensor& y) {
  apply(x, y);
  x_cache_ = x;
  if (relu_) y_cache_ = y;
}

void Dense::backward(const Tensor& dy, Tensor* dx) {
  const int n = dy.n;
  MatRM dpre = CMapRM(dy.data.data(), n, width_);
  if (relu_) {
    const CMapRM out(y_cache_.data.data(), n, width_);
    dpre = (out.array() > 0.0).select(dpre, 0.0);
  }
  const CMapRM xm(x_cache_.data.data(), n, in_features_);
  MapRM(gweight_.data(), in_features_, width_).noalias() += xm.transpose() * dpre;
  MapRow(gbias_.data(), width_) += dpre.colwise().sum();
  if (dx) {
    dx->resize(n, x_cache_.h, x_cache_.w, x_cache_.c);
    MapRM(dx->data.data(), n, in_features_).noalias() =
        dpre * CMapRM(weight_.data(), in_features_, width_).transpose();
  }
}

std::vector<ParamView> Dense::params() { return {{weight_, gweight_}, {bias_, gbias_}}; }

// ---------------------------------------------------------------- Network

Network::Network(const ArchitectureDescriptor& arch, Rng& init) : arch_(arch) {
  const auto shapes = propagate_shape(arch);
  TensorShape in = arch.input;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& op = arch.layers[i];
    switch (op.kind) {
      case LayerKind::Conv: layers_.emplace_back(Conv(op.filters, op.kernel, in, init)); break;
      case LayerKind::MaxPool: layers_.emplace_back(MaxPool(op.pool, in)); break;
      case LayerKind::BatchNorm: layers_.emplace_back(BatchNorm(in)); break;
      case LayerKind::Dropout: layers_.emplace_back(Dropout(op.rate, in)); break;
      case LayerKind::Dense: layers_.emplace_back(Dense(shapes[i].channels, in, true, init)); break;
    }
    in = shapes[i];
  }
  layers_.emplace_back(Dense(arch.num_classes, in, false, init));
  for (auto& p : params()) param_count_ += p.value.size();
}

Tensor Network::infer(const Tensor& x) const {
  Tensor cur = x, next;
  for (const auto& layer : layers_) {
    std::visit([&](const auto& l) { l.infer(cur, next); }, layer);
    std::swap(cur, next);
  }
  return cur;
}

Tensor Network::forward(const Tensor& x, Rng& rng) {
  Tensor cur = x, next;
  for (auto& layer : layers_) {
    std::visit(
        [&](auto& l) {
          if constexpr (std::is_same_v<std::decay_t<decltype(l)>, Dropout>)
            l.forward(cur, next, rng);
          else
            l.forward(cur, next);
        },
        layer);
    std::swap(cur, next);
  }
  return cur;
}

Tensor Network::backward(const Tensor& dlogits, bool input_grad) {
  Tensor grad = dlogits, next;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const bool want = i > 0 || input_grad;
    std::visit([&](auto& l) { l.backward(grad, want ? &next : nullptr); }, layers_[i]);
    if (want) std::swap(grad, next);
  }
  return input_grad ? grad : Tensor{};
}

void Network::zero_grad() {
  for (auto& p : params()) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

std::vector<ParamView> Network::params() {
  std::vector<ParamView> out;
  for (auto& layer : layers_) {
    auto ps = std::visit([](auto& l) { return l.params(); }, layer);
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

std::vector<double> Network::weights() const {
  std::vector<double> w;
  w.reserve(param_count_);
  // params() hands out mutable views but does not modify the network.
  for (auto& p : const_cast<Network*>(this)->params()) w.insert(w.end(), p.value.begin(), p.value.end());
  return w;
}

void Network::set_weights(std::span<const double> w) {
  if (w.size() != param_count_) throw Error("weight count mismatch");
  std::size_t off = 0;
  for (auto& p : params()) {
    std::copy_n(w.begin() + static_cast<std::ptrdiff_t>(off), p.value.size(), p.value.begin());
    off += p.value.size();
  }
}

std::vector<double> Network::state() const {
  std::vector<double> s;
  for (const auto& layer : layers_) {
    auto ls = std::visit([](const auto& l) { return l.state(); }, layer);
    s.insert(s.end(), ls.begin(), ls.end());
  }
  return s;
}

void Network::set_state(std::span<const double> s) {
  std::size_t off = 0;
  for (auto& layer : layers_) {
    std::visit(
        [&](auto& l) {
          const std::size_t n = l.state().size();
          if (off + n > s.size()) throw Error("network state too short");
          l.set_state(s.subspan(off, n));
          off += n;
        },
        layer);
  }
  if (off != s.size()) throw Error("network state size mismatch");
}

double softmax_cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor* dlogits) {
  const int n = logits.n;
  const auto k = logits.per_sample();
  if (dlogits) *dlogits = logits;
  double loss = 0.0;
  for (int s = 0; s < n; ++s) {
    const double* z = logits.data.data() + static_cast<std::size_t>(s) * k;
    const double zmax = *std::max_element(z, z + k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(z[c] - zmax);
    const double log_sum = zmax + std::log(sum);
    const auto y = static_cast<std::size_t>(labels[static_cast<std::size_t>(s)]);
    loss += log_sum - z[y];
    if (dlogits) {
      double* g = dlogits->data.data() + static_cast<std::size_t>(s) * k;
      for (std::size_t c = 0; c < k; ++c)
        g[c] = (std::exp(z[c] - log_sum) - (c == y ? 1.0 : 0.0)) / n;
    }
  }
  return loss / n;
}

std::vector<double> softmax(const Tensor& logits) {
  const auto k = logits.per_sample();
  std::vector<double> out(logits.size());
  for (int s = 0; s < logits.n; ++s) {
    const double* z = logits.data.data() + static_cast<std::size_t>(s) * k;
    double* p = out.data() + static_cast<std::size_t>(s) * k;
    const double zmax = *std::max_element(z, z + k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += (p[c] = std::exp(z[c] - zmax));
    for (std::size_t c = 0; c < k; ++c) p[c] /= sum;
  }
  return out;
}

}  // namespace nlgp::nn
