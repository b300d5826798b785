#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurolgp/data.hpp"
#include "neurolgp/genome.hpp"
#include "neurolgp/metrics.hpp"
#include "neurolgp/nn/proxy.hpp"
#include "neurolgp/nn/trainer.hpp"
#include "neurolgp/repair.hpp"
#include "neurolgp/surrogate.hpp"
#include "neurolgp/variation.hpp"

namespace nlgp {

enum class Mode : std::uint8_t { Baseline, Expensive, Surrogate };
enum class Backend : std::uint8_t { Trainer, Proxy };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);
std::string_view to_string(Backend b);
std::optional<Backend> parse_backend(std::string_view s);

struct RunConfig {
  Mode mode = Mode::Surrogate;
  std::size_t population = 50;
  std::size_t generations = 15;
  int full_epochs = 30;
  int partial_epochs = 10;
  /// Share of each generation (g >= 1) whose fitness is imputed; the rest is
  /// fully trained. 0 trains everyone and skips the partial phase.
  double surrogate_fraction = 0.6;
  std::uint64_t seed = 0;

  GenomeConfig genome;
  VariationConfig variation;
  std::int64_t max_flatten = 4096;
  std::int64_t max_params = 2'000'000;
  DataConfig data;
  std::uint64_t data_seed = 0;
  int smote_k = 5;
  nn::TrainConfig train;
  SurrogateConfig surrogate;
  int proxy_validation_rows = 60;  ///< phenotype rows under the proxy backend

  void validate() const;
  RepairConfig repair_config() const;
};

/// Individuals trained to full_epochs per generation (g >= 1, surrogate mode).
std::size_t full_evaluations_per_generation(const RunConfig& cfg);

/// Epoch-units a run of `cfg` consumes: N F G for baseline and expensive;
/// N F + (G - 1)(N P + n_full F) for surrogate mode.
double modeled_cost(const RunConfig& cfg);

/// Training seed of an architecture within a run. Individuals with the same
/// decoded chain share it, so re-evaluating an elite reproduces its fitness.
std::uint64_t training_seed(std::uint64_t run_seed, const ArchitectureDescriptor& arch);

// ---------------------------------------------------------------- evaluation

struct Evaluation {
  nn::EvalResult result;
  std::optional<nn::EvalResult> captured;  ///< state after `capture` epochs
  bool diverged = false;
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  /// Trains `arch` for `epochs` from scratch under `seed`. When
  /// 0 < capture < epochs the intermediate result is returned too.
  virtual Evaluation evaluate(const ArchitectureDescriptor& arch, std::uint64_t seed, int epochs,
                              int capture = 0) = 0;
  /// Phenotype length every evaluation produces.
  virtual std::size_t phenotype_size() const = 0;
  /// Hint that intermediate models kept for reuse can be dropped.
  virtual void end_generation() {}
};

/// Real training on a prepared dataset. Training is a pure function of
/// (architecture, seed, epochs), so results are memoised, and a model stopped
/// after e epochs is continued rather than retrained when more epochs are
/// requested; continuation is bit-identical to training from scratch.
class TrainerEvaluator : public Evaluator {
 public:
  /// Models stopped short of `resume_horizon` epochs are kept until
  /// end_generation() so a later, longer request can continue them.
  TrainerEvaluator(std::shared_ptr<const PreparedData> data, nn::TrainConfig cfg,
                   int resume_horizon = 0, bool memoise = true);
  Evaluation evaluate(const ArchitectureDescriptor& arch, std::uint64_t seed, int epochs,
                      int capture = 0) override;
  std::size_t phenotype_size() const override;
  void end_generation() override;

  const PreparedData& data() const { return *data_; }
  /// Epochs actually computed (memoised work excluded).
  std::int64_t epochs_computed() const { return epochs_computed_; }

 private:
  struct Outcome {
    nn::EvalResult result;
    bool diverged = false;
  };
  struct Entry {
    std::map<int, Outcome> results;
    std::optional<nn::TrainedModel> model;
  };

  std::shared_ptr<const PreparedData> data_;
  nn::TrainConfig cfg_;
  int resume_horizon_;
  bool memoise_;
  std::mutex mutex_;
  std::map<std::pair<std::string, std::uint64_t>, Entry> cache_;
  std::int64_t epochs_computed_ = 0;
};

class ProxyEvaluator : public Evaluator {
 public:
  explicit ProxyEvaluator(nn::ProxyConfig cfg) : cfg_(cfg) {}
  Evaluation evaluate(const ArchitectureDescriptor& arch, std::uint64_t seed, int epochs,
                      int capture = 0) override;
  std::size_t phenotype_size() const override {
    return static_cast<std::size_t>(cfg_.n_validation) * static_cast<std::size_t>(cfg_.n_classes);
  }

 private:
  nn::ProxyConfig cfg_;
};

/// Builds the dataset (trainer backend) or the proxy for `cfg`.
std::unique_ptr<Evaluator> make_evaluator(const RunConfig& cfg, Backend backend);

// ---------------------------------------------------------------- results

struct Individual {
  std::size_t index = 0;  ///< position in its generation
  std::size_t born = 0;   ///< generation it was created in
  bool elite = false;
  Genome genome;          ///< as produced by initialisation or variation
  Genome repaired;
  RepairReport report;
  ArchitectureDescriptor arch;
  std::uint64_t train_seed = 0;

  nn::EvalResult eval;
  double cost_units = 0.0;  ///< epochs charged to this individual this generation
  bool diverged = false;

  // Surrogate-mode fields (NaN / empty otherwise).
  double partial_fitness = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> partial_phenotype;
  double predicted_mean = std::numeric_limits<double>::quiet_NaN();
  double predicted_variance = std::numeric_limits<double>::quiet_NaN();
  double expected_improvement = std::numeric_limits<double>::quiet_NaN();
};

struct GenerationStats {
  std::size_t generation = 0;
  std::size_t n_full = 0;
  std::size_t n_surrogate = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double median_fitness = 0.0;
  double best_full_so_far = 0.0;  ///< best realized (fully trained) fitness so far
  double cost_units = 0.0;
  double cumulative_cost = 0.0;
  std::size_t archive_size = 0;
  std::size_t archive_additions = 0;  ///< cumulative pairs offered to the archive
  FitReport fit{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                std::numeric_limits<double>::quiet_NaN(), 0};
  bool surrogate_fallback = false;
  std::string note;
};

struct RunResult {
  RunConfig config;
  std::vector<GenerationStats> generations;
  std::vector<std::vector<Individual>> populations;
  Individual best;  ///< highest fully trained fitness over the run
  double total_cost = 0.0;

  std::vector<double> best_trajectory() const;  ///< best_full_so_far per generation
};

/// Receives every finished generation, e.g. to stream logs.
using GenerationObserver = std::function<void(const GenerationStats&, std::span<const Individual>)>;

RunResult run_baseline(const RunConfig& cfg, Evaluator& eval, const GenerationObserver& obs = {});
RunResult run_expensive(const RunConfig& cfg, Evaluator& eval, const GenerationObserver& obs = {});
RunResult run_surrogate(const RunConfig& cfg, Evaluator& eval, const GenerationObserver& obs = {});
/// Dispatches on cfg.mode.
RunResult run(const RunConfig& cfg, Evaluator& eval, const GenerationObserver& obs = {});

/// 100 (1 - surrogate cost / expensive cost) in epoch-units.
double cost_summary(const RunResult& expensive, const RunResult& surrogate);

/// Worker count for evaluations: NEUROLGP_THREADS if set, else the hardware
/// concurrency.
std::size_t worker_count();

// ---------------------------------------------------------------- output

/// Streams runlog.jsonl, generations.csv and (surrogate mode)
/// surrogate_fit.csv into `dir`, flushing after each generation.
class RunWriter {
 public:
  RunWriter(const std::filesystem::path& dir, const RunConfig& cfg);
  void operator()(const GenerationStats& stats, std::span<const Individual> pop);
  /// Writes best_genome.txt.
  void finish(const RunResult& result);

 private:
  std::filesystem::path dir_;
  RunConfig cfg_;
  std::ofstream runlog_, generations_, surrogate_fit_;
};

}  // namespace nlgp
