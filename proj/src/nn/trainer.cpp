#include "neurolgp/nn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "neurolgp/errors.hpp"
#include "neurolgp/nn/shape.hpp"

namespace nlgp::nn {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
}

namespace {

Tensor gather(const Samples& s, const TensorShape& shape, std::span<const std::size_t> rows) {
  Tensor t(static_cast<int>(rows.size()), shape.height, shape.width, shape.channels);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(s.row(rows[i]), s.row(rows[i]) + s.dim, t.data.data() + i * s.dim);
  return t;
}

void run_epoch(TrainedModel& m, const PreparedData& data, const TrainConfig& cfg) {
  const int epoch = m.epochs_trained;
  Rng rng(derive_seed(m.seed, {static_cast<std::uint64_t>(epoch)}));
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());

  double loss_sum = 0.0;
  std::size_t correct = 0;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  std::vector<int> labels;
  Tensor dlogits;
  for (std::size_t start = 0; start < order.size(); start += bs) {
    const std::span<const std::size_t> rows(order.data() + start, std::min(bs, order.size() - start));
    const Tensor x = gather(data.train, data.shape, rows);
    labels.clear();
    for (auto r : rows) labels.push_back(data.train.labels[r]);

    m.net.zero_grad();
    const Tensor logits = m.net.forward(x, rng);
    const double loss = softmax_cross_entropy(logits, labels, &dlogits);
    if (!std::isfinite(loss))
      throw NumericalDivergence("non-finite loss in epoch " + std::to_string(epoch + 1));
    loss_sum += loss * static_cast<double>(rows.size());
    correct += static_cast<std::size_t>(
        std::lround(accuracy(softmax(logits), labels, data.n_classes) * static_cast<double>(rows.size())));
    m.net.backward(dlogits);

    std::size_t off = 0;
    for (auto& p : m.net.params()) {
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        double& v = m.velocity[off + i];
        v = cfg.momentum * v - cfg.learning_rate * p.grad[i];
        p.value[i] += v;
      }
      off += p.value.size();
    }
  }

  const double n = static_cast<double>(order.size());
  EpochRecord rec;
  rec.epoch = epoch + 1;
  rec.loss = loss_sum / n;
  rec.train_accuracy = static_cast<double>(correct) / n;
  rec.validation_accuracy = data.validation.size() == 0
                                ? 0.0
                                : accuracy(predict_proba(m.net, data.validation, data.shape),
                                           data.validation.labels, data.n_classes);
  m.history.push_back(rec);
  m.epochs_trained = epoch + 1;
}

}  // namespace

TrainedModel initialise(const ArchitectureDescriptor& arch, std::uint64_t seed) {
  Rng init(derive_seed(seed, {hash_string("init")}));
  TrainedModel m{Network(arch, init), {}, 0, seed, {}};
  m.velocity.assign(m.net.param_count(), 0.0);
  return m;
}

TrainedModel train(const ArchitectureDescriptor& arch, const PreparedData& data, int epochs,
                   std::uint64_t seed, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  TrainedModel m = initialise(arch, seed);
  continue_training(m, data, epochs, cfg, on_epoch);
  return m;
}

void continue_training(TrainedModel& model, const PreparedData& data, int epochs,
                       const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.train.size() == 0) throw std::invalid_argument("train: empty training split");
  for (int e = 0; e < epochs; ++e) {
    run_epoch(model, data, cfg);
    if (on_epoch) on_epoch(model);
  }
}

std::vector<double> predict_proba(const Network& net, const Samples& samples, const TensorShape& shape) {
  constexpr std::size_t kChunk = 64;
  std::vector<double> out;
  out.reserve(samples.size() * static_cast<std::size_t>(net.arch().num_classes));
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < samples.size(); start += kChunk) {
    rows.clear();
    for (std::size_t i = start; i < std::min(samples.size(), start + kChunk); ++i) rows.push_back(i);
    const auto p = softmax(net.infer(gather(samples, shape, rows)));
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

double accuracy(std::span<const double> proba, std::span<const int> labels, int n_classes) {
  const auto k = static_cast<std::size_t>(n_classes);
  if (proba.size() != labels.size() * k) throw LengthMismatch("accuracy: probability rows do not match labels");
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = proba.subspan(i * k, k);
    const auto arg = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    correct += arg == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Full: return "FULL";
    case Provenance::Partial: return "PARTIAL";
    case Provenance::Surrogate: return "SURROGATE";
  }
  return "?";
}

EvalResult evaluate(const TrainedModel& model, const PreparedData& data) {
  EvalResult r;
  r.fitness = accuracy(predict_proba(model.net, data.test1, data.shape), data.test1.labels, data.n_classes);
  r.phenotype = predict_proba(model.net, data.validation, data.shape);
  r.epochs_trained = model.epochs_trained;
  r.param_count = static_cast<std::int64_t>(model.net.param_count());
  r.cost_units = model.epochs_trained;
  return r;
}

EvalResult diverged_result(const ArchitectureDescriptor& arch, const PreparedData& data, int epochs) {
  EvalResult r;
  r.fitness = 0.0;
  r.phenotype.assign(data.validation.size() * static_cast<std::size_t>(data.n_classes),
                     1.0 / data.n_classes);
  r.epochs_trained = epochs;
  r.param_count = param_count(arch);
  r.cost_units = epochs;
  return r;
}

namespace {

constexpr char kMagic[4] = {'N', 'L', 'G', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("checkpoint truncated");
  return v;
}

void put_doubles(std::ostream& os, std::span<const double> v) {
  put<std::uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > (std::uint64_t{1} << 34)) throw Error("checkpoint array too large");
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw Error("checkpoint truncated");
  return v;
}

}  // namespace

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  const auto& arch = model.net.arch();
  os.write(kMagic, 4);
  put(os, kVersion);
  put<std::int32_t>(os, arch.input.height);
  put<std::int32_t>(os, arch.input.width);
  put<std::int32_t>(os, arch.input.channels);
  put<std::int32_t>(os, arch.num_classes);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(arch.layers.size()));
  const auto shapes = propagate_shape(arch);
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& l = arch.layers[i];
    put<std::uint8_t>(os, static_cast<std::uint8_t>(l.kind));
    put<std::int32_t>(os, l.filters);
    put<std::int32_t>(os, l.kernel);
    put<std::int32_t>(os, l.pool);
    put<double>(os, l.rate);
    put<std::int32_t>(os, shapes[i].height);
    put<std::int32_t>(os, shapes[i].width);
    put<std::int32_t>(os, shapes[i].channels);
  }
  put_doubles(os, model.net.weights());
  put_doubles(os, model.net.state());
  put_doubles(os, model.velocity);
  put<std::int32_t>(os, model.epochs_trained);
  put<std::uint64_t>(os, model.seed);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(model.history.size()));
  for (const auto& h : model.history) {
    put<std::int32_t>(os, h.epoch);
    put<double>(os, h.loss);
    put<double>(os, h.train_accuracy);
    put<double>(os, h.validation_accuracy);
  }
  if (!os) throw Error("failed writing " + path.string());
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw Error("not a model checkpoint");
  if (get<std::uint32_t>(is) != kVersion) throw Error("unsupported checkpoint version");
  ArchitectureDescriptor arch;
  arch.input.height = get<std::int32_t>(is);
  arch.input.width = get<std::int32_t>(is);
  arch.input.channels = get<std::int32_t>(is);
  arch.num_classes = get<std::int32_t>(is);
  const auto n_layers = get<std::uint32_t>(is);
  std::vector<TensorShape> stored;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    LayerOp l;
    const auto kind = get<std::uint8_t>(is);
    if (kind > static_cast<std::uint8_t>(LayerKind::Dense)) throw Error("invalid layer kind in checkpoint");
    l.kind = static_cast<LayerKind>(kind);
    l.filters = get<std::int32_t>(is);
    l.kernel = get<std::int32_t>(is);
    l.pool = get<std::int32_t>(is);
    l.rate = get<double>(is);
    arch.layers.push_back(l);
    TensorShape s;
    s.height = get<std::int32_t>(is);
    s.width = get<std::int32_t>(is);
    s.channels = get<std::int32_t>(is);
    stored.push_back(s);
  }
  if (propagate_shape(arch) != stored) throw Error("checkpoint shape table does not match architecture");

  Rng init(0);
  TrainedModel m{Network(arch, init), {}, 0, 0, {}};
  m.net.set_weights(get_doubles(is));
  m.net.set_state(get_doubles(is));
  m.velocity = get_doubles(is);
  if (m.velocity.size() != m.net.param_count()) throw Error("checkpoint velocity size mismatch");
  m.epochs_trained = get<std::int32_t>(is);
  m.seed = get<std::uint64_t>(is);
  const auto n_hist = get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < n_hist; ++i) {
    EpochRecord h;
    h.epoch = get<std::int32_t>(is);
    h.loss = get<double>(is);
    h.train_accuracy = get<double>(is);
    h.validation_accuracy = get<double>(is);
    m.history.push_back(h);
  }
  return m;
}

}  // namespace nlgp::nn
