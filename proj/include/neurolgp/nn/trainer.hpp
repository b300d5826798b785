#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string_view>
#include <vector>

#include "neurolgp/data.hpp"
#include "neurolgp/nn/network.hpp"

namespace nlgp::nn {

struct TrainConfig {
  int batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
};

struct TrainedModel {
  Network net;
  std::vector<double> velocity;  ///< momentum buffer, one entry per parameter
  int epochs_trained = 0;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> history;
};

/// Called after every completed epoch.
using EpochCallback = std::function<void(const TrainedModel&)>;

/// Untrained model: He-uniform weights from derive_seed(seed, "init"), zero
/// momentum.
TrainedModel initialise(const ArchitectureDescriptor& arch, std::uint64_t seed);

/// Minibatch SGD with momentum on softmax cross-entropy over `data.train`.
/// Weights are initialised from derive_seed(seed, "init"); epoch e shuffles
/// and draws dropout masks from its own stream, so training a epochs and then
/// continuing for b epochs is identical to training a + b epochs.
/// Throws NumericalDivergence when the loss becomes non-finite.
TrainedModel train(const ArchitectureDescriptor& arch, const PreparedData& data, int epochs,
                   std::uint64_t seed, const TrainConfig& cfg = {},
                   const EpochCallback& on_epoch = {});

void continue_training(TrainedModel& model, const PreparedData& data, int epochs,
                       const TrainConfig& cfg = {}, const EpochCallback& on_epoch = {});

/// Softmax outputs, row-major (sample, class).
std::vector<double> predict_proba(const Network& net, const Samples& samples, const TensorShape& shape);

/// Fraction of rows whose argmax (lowest index on ties) equals the label.
double accuracy(std::span<const double> proba, std::span<const int> labels, int n_classes);

enum class Provenance : std::uint8_t { Full, Partial, Surrogate };

std::string_view to_string(Provenance p);

struct EvalResult {
  double fitness = 0.0;              ///< accuracy on the fitness split
  std::vector<double> phenotype;     ///< softmax rows over the validation split
  int epochs_trained = 0;
  std::int64_t param_count = 0;
  double cost_units = 0.0;           ///< epochs trained
  Provenance provenance = Provenance::Full;
};

/// Fitness on test1, phenotype on the validation split.
EvalResult evaluate(const TrainedModel& model, const PreparedData& data);

/// Result assigned when training diverges: fitness 0, uniform phenotype.
EvalResult diverged_result(const ArchitectureDescriptor& arch, const PreparedData& data, int epochs);

/// Binary checkpoint: "NLGP", u32 version, architecture, shape table, flat
/// weights, running statistics, momentum buffer, epoch count and seed.
void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace nlgp::nn
