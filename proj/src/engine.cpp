#include "neurolgp/engine.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <thread>

#include <json.hpp>

#include "neurolgp/errors.hpp"
#include "neurolgp/nn/shape.hpp"

namespace nlgp {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Baseline: return "baseline";
    case Mode::Expensive: return "expensive";
    case Mode::Surrogate: return "surrogate";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "baseline") return Mode::Baseline;
  if (s == "expensive") return Mode::Expensive;
  if (s == "surrogate") return Mode::Surrogate;
  return std::nullopt;
}

std::string_view to_string(Backend b) { return b == Backend::Trainer ? "trainer" : "proxy"; }

std::optional<Backend> parse_backend(std::string_view s) {
  if (s == "trainer") return Backend::Trainer;
  if (s == "proxy") return Backend::Proxy;
  return std::nullopt;
}

void RunConfig::validate() const {
  if (population < 2) throw ConfigError("population must be >= 2");
  if (generations < 1) throw ConfigError("generations must be >= 1");
  if (full_epochs < 1) throw ConfigError("full_epochs must be >= 1");
  if (mode == Mode::Surrogate && (partial_epochs < 1 || partial_epochs >= full_epochs))
    throw ConfigError("partial_epochs must be in [1, full_epochs)");
  if (!(surrogate_fraction >= 0.0 && surrogate_fraction < 1.0))
    throw ConfigError("surrogate_fraction must be in [0, 1)");
  if (variation.elitism >= population) throw ConfigError("elitism must be smaller than the population");
  if (max_flatten < 128) throw ConfigError("max_flatten must be >= 128");
  if (max_params < 1) throw ConfigError("max_params must be >= 1");
  if (smote_k < 1) throw ConfigError("smote_k must be >= 1");
  if (proxy_validation_rows < 1) throw ConfigError("proxy_validation_rows must be >= 1");
  if (surrogate.h < 1) throw ConfigError("surrogate.h must be >= 1");
  if (surrogate.restarts < 1) throw ConfigError("surrogate.restarts must be >= 1");
  if (surrogate.max_evaluations < 1) throw ConfigError("surrogate.max_evaluations must be >= 1");
  if (!(surrogate.log10_theta_min < surrogate.log10_theta_max))
    throw ConfigError("surrogate theta bounds are inverted");
  if (!(surrogate.nugget > 0.0 && surrogate.nugget <= surrogate.nugget_max))
    throw ConfigError("surrogate nugget must be in (0, nugget_max]");
  genome.validate();
  variation.validate();
  data.validate();
  train.validate();
}

RepairConfig RunConfig::repair_config() const {
  RepairConfig r;
  r.num_classes = data.n_classes;
  r.max_flatten = max_flatten;
  r.max_params = max_params;
  r.genome = genome;
  return r;
}

std::size_t full_evaluations_per_generation(const RunConfig& cfg) {
  const double n = (1.0 - cfg.surrogate_fraction) * static_cast<double>(cfg.population);
  return std::min(cfg.population, static_cast<std::size_t>(std::ceil(n - 1e-9)));
}

double modeled_cost(const RunConfig& cfg) {
  const double N = static_cast<double>(cfg.population);
  const double G = static_cast<double>(cfg.generations);
  const double F = cfg.full_epochs;
  if (cfg.mode != Mode::Surrogate || cfg.surrogate_fraction == 0.0) return N * F * G;
  const double later = N * cfg.partial_epochs + static_cast<double>(full_evaluations_per_generation(cfg)) * F;
  return N * F + (G - 1.0) * later;
}

std::uint64_t training_seed(std::uint64_t run_seed, const ArchitectureDescriptor& arch) {
  return derive_seed(run_seed, {hash_string("train"), hash_string(describe(arch))});
}

std::size_t worker_count() {
  if (const char* env = std::getenv("NEUROLGP_THREADS")) {
    std::size_t n = 0;
    const std::string_view s(env);
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc() && p == s.data() + s.size() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- evaluators

TrainerEvaluator::TrainerEvaluator(std::shared_ptr<const PreparedData> data, nn::TrainConfig cfg,
                                   int resume_horizon, bool memoise)
    : data_(std::move(data)), cfg_(cfg), resume_horizon_(resume_horizon), memoise_(memoise) {
  cfg_.validate();
}

std::size_t TrainerEvaluator::phenotype_size() const {
  return data_->validation.size() * static_cast<std::size_t>(data_->n_classes);
}

void TrainerEvaluator::end_generation() {
  std::lock_guard lock(mutex_);
  for (auto& [key, entry] : cache_) entry.model.reset();
}

Evaluation TrainerEvaluator::evaluate(const ArchitectureDescriptor& arch, std::uint64_t seed, int epochs,
                                      int capture) {
  if (epochs < 1) throw std::invalid_argument("evaluate: epochs must be >= 1");
  std::vector<int> targets;
  if (capture > 0 && capture < epochs) targets.push_back(capture);
  targets.push_back(epochs);

  const auto key = std::make_pair(describe(arch) + "|" + arch.input.str() + "|" +
                                      std::to_string(arch.num_classes),
                                  seed);
  std::map<int, Outcome> results;
  std::optional<nn::TrainedModel> model;
  if (memoise_) {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      results = it->second.results;
      int first_missing = epochs + 1;
      for (int t : targets)
        if (!results.count(t)) first_missing = std::min(first_missing, t);
      if (it->second.model && it->second.model->epochs_trained <= first_missing && first_missing <= epochs)
        model = std::move(it->second.model), it->second.model.reset();
    }
  }

  const auto missing = [&] {
    std::set<int> m;
    for (int t : targets)
      if (!results.count(t)) m.insert(t);
    return m;
  }();

  if (!missing.empty()) {
    if (model && model->epochs_trained > *missing.begin()) model.reset();
    if (!model) model = nn::initialise(arch, seed);
    const int start = model->epochs_trained;
    try {
      nn::continue_training(*model, *data_, epochs - start, cfg_, [&](const nn::TrainedModel& m) {
        if (missing.count(m.epochs_trained) && !results.count(m.epochs_trained))
          results[m.epochs_trained] = {nn::evaluate(m, *data_), false};
      });
    } catch (const NumericalDivergence&) {
      for (int t : missing)
        if (!results.count(t)) results[t] = {nn::diverged_result(arch, *data_, t), true};
      model.reset();
    }
    std::lock_guard lock(mutex_);
    epochs_computed_ += epochs - start;
    if (memoise_) {
      auto& entry = cache_[key];
      for (const auto& [e, r] : results) entry.results.emplace(e, r);
      if (model && model->epochs_trained < resume_horizon_ &&
          (!entry.model || entry.model->epochs_trained < model->epochs_trained))
        entry.model = std::move(model);
    }
  }

  Evaluation out;
  out.result = results.at(epochs).result;
  out.diverged = results.at(epochs).diverged;
  if (targets.size() == 2) out.captured = results.at(capture).result;
  return out;
}

Evaluation ProxyEvaluator::evaluate(const ArchitectureDescriptor& arch, std::uint64_t, int epochs, int capture) {
  if (epochs < 1) throw std::invalid_argument("evaluate: epochs must be >= 1");
  Evaluation out;
  out.result = nn::proxy_evaluate(arch, epochs, cfg_);
  if (capture > 0 && capture < epochs) out.captured = nn::proxy_evaluate(arch, capture, cfg_);
  return out;
}

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& cfg, Backend backend) {
  if (backend == Backend::Proxy) {
    nn::ProxyConfig p;
    p.n_validation = cfg.proxy_validation_rows;
    p.n_classes = cfg.data.n_classes;
    p.full_epochs = cfg.full_epochs;
    return std::make_unique<ProxyEvaluator>(p);
  }
  auto data = std::make_shared<const PreparedData>(prepare(generate(cfg.data, cfg.data_seed), cfg.smote_k, cfg.data_seed));
  return std::make_unique<TrainerEvaluator>(std::move(data), cfg.train, cfg.full_epochs);
}

// ---------------------------------------------------------------- engine

std::vector<double> RunResult::best_trajectory() const {
  std::vector<double> out;
  for (const auto& g : generations) out.push_back(g.best_full_so_far);
  return out;
}

double cost_summary(const RunResult& expensive, const RunResult& surrogate) {
  return cost_reduction(expensive.total_cost, surrogate.total_cost);
}

namespace {

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

class Engine {
 public:
  Engine(const RunConfig& cfg, Evaluator& eval, const GenerationObserver& obs)
      : cfg_(cfg), eval_(eval), obs_(obs), rng_(derive_seed(cfg.seed, {hash_string("evolution")})) {
    cfg_.validate();
    result_.config = cfg_;
  }

  RunResult baseline() {
    for (std::size_t g = 0; g < cfg_.generations; ++g) {
      auto pop = random_population(g);
      GenerationStats stats = stats_for(g);
      evaluate_full(pop, stats, false);
      finish_generation(std::move(pop), stats);
    }
    return std::move(result_);
  }

  RunResult evolve(bool surrogate) {
    auto pop = random_population(0);
    for (std::size_t g = 0; g < cfg_.generations; ++g) {
      GenerationStats stats = stats_for(g);
      if (!surrogate) {
        evaluate_full(pop, stats, false);
      } else if (g == 0 || cfg_.surrogate_fraction == 0.0) {
        evaluate_full(pop, stats, true);
      } else {
        evaluate_managed(pop, stats);
      }
      auto next = g + 1 < cfg_.generations ? breed(pop, g + 1) : std::vector<Individual>{};
      finish_generation(std::move(pop), stats);
      pop = std::move(next);
    }
    return std::move(result_);
  }

 private:
  Individual make_individual(Genome genome, std::size_t born) const {
    Individual ind;
    ind.born = born;
    ind.genome = std::move(genome);
    auto rr = repair(ind.genome, cfg_.data.shape, cfg_.repair_config());
    ind.repaired = std::move(rr.genome);
    ind.report = std::move(rr.report);
    ind.arch = decode(ind.repaired, cfg_.data.shape, cfg_.data.n_classes, cfg_.genome);
    ind.train_seed = training_seed(cfg_.seed, ind.arch);
    return ind;
  }

  std::vector<Individual> random_population(std::size_t generation) {
    std::vector<Individual> pop;
    for (std::size_t i = 0; i < cfg_.population; ++i) {
      pop.push_back(make_individual(random_genome(rng_, cfg_.genome), generation));
      pop.back().index = i;
    }
    return pop;
  }

  GenerationStats stats_for(std::size_t g) const {
    GenerationStats s;
    s.generation = g;
    return s;
  }

  void charge(Individual& ind, GenerationStats& stats, int epochs) {
    ind.cost_units += epochs;
    stats.cost_units += epochs;
  }

  /// Everyone trained to full_epochs. With `seed_archive`, the phenotype after
  /// partial_epochs is captured on the way and paired with the final fitness.
  void evaluate_full(std::vector<Individual>& pop, GenerationStats& stats, bool seed_archive) {
    const int capture = seed_archive ? cfg_.partial_epochs : 0;
    std::vector<Evaluation> evs(pop.size());
    parallel_for(pop.size(), [&](std::size_t i) {
      evs[i] = eval_.evaluate(pop[i].arch, pop[i].train_seed, cfg_.full_epochs, capture);
    });
    for (std::size_t i = 0; i < pop.size(); ++i) {
      auto& ind = pop[i];
      ind.eval = std::move(evs[i].result);
      ind.eval.provenance = nn::Provenance::Full;
      ind.diverged = evs[i].diverged;
      charge(ind, stats, cfg_.full_epochs);
      if (seed_archive && evs[i].captured) {
        ind.partial_fitness = evs[i].captured->fitness;
        ind.partial_phenotype = evs[i].captured->phenotype;
        add_to_archive(ind.partial_phenotype, ind.eval.fitness);
      }
    }
    stats.n_full = pop.size();
    eval_.end_generation();
  }

  void add_to_archive(const std::vector<double>& x, double y) {
    archive_.add(x, y);
    ++archive_additions_;
  }

  void evaluate_managed(std::vector<Individual>& pop, GenerationStats& stats) {
    // (a) partial training of everyone.
    std::vector<Evaluation> partial(pop.size());
    parallel_for(pop.size(), [&](std::size_t i) {
      partial[i] = eval_.evaluate(pop[i].arch, pop[i].train_seed, cfg_.partial_epochs);
    });
    for (std::size_t i = 0; i < pop.size(); ++i) {
      pop[i].partial_fitness = partial[i].result.fitness;
      pop[i].partial_phenotype = partial[i].result.phenotype;
      charge(pop[i], stats, cfg_.partial_epochs);
    }

    // (b) refit on the whole archive.
    std::optional<SurrogateModel> model;
    try {
      model = SurrogateModel::fit(archive_, cfg_.surrogate);
    } catch (const Error& e) {
      stats.surrogate_fallback = true;
      stats.note = std::string("surrogate fit failed, evaluating everyone: ") + e.what();
    }

    std::vector<std::size_t> chosen;
    if (model) {
      // (c) predictions and expected improvement against the best realized fitness.
      for (auto& ind : pop) {
        const auto p = model->predict(ind.partial_phenotype);
        ind.predicted_mean = p.mean;
        ind.predicted_variance = p.variance;
        ind.expected_improvement = expected_improvement(p.mean, p.variance, best_full_);
      }
      // (d) rank by EI, then predicted mean, then index.
      std::vector<std::size_t> order(pop.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = pop[a];
        const auto& y = pop[b];
        if (x.expected_improvement != y.expected_improvement) return x.expected_improvement > y.expected_improvement;
        if (x.predicted_mean != y.predicted_mean) return x.predicted_mean > y.predicted_mean;
        return a < b;
      });
      order.resize(full_evaluations_per_generation(cfg_));
      chosen = std::move(order);
      std::sort(chosen.begin(), chosen.end());
    } else {
      chosen.resize(pop.size());
      std::iota(chosen.begin(), chosen.end(), 0);
    }

    // Fully train the chosen subset from scratch.
    std::vector<Evaluation> full(chosen.size());
    parallel_for(chosen.size(), [&](std::size_t k) {
      const auto& ind = pop[chosen[k]];
      full[k] = eval_.evaluate(ind.arch, ind.train_seed, cfg_.full_epochs);
    });
    std::vector<bool> is_full(pop.size(), false);
    std::vector<double> predicted, actual;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      auto& ind = pop[chosen[k]];
      is_full[chosen[k]] = true;
      ind.eval = std::move(full[k].result);
      ind.eval.provenance = nn::Provenance::Full;
      ind.diverged = full[k].diverged;
      charge(ind, stats, cfg_.full_epochs);
      add_to_archive(ind.partial_phenotype, ind.eval.fitness);
      if (model) {
        predicted.push_back(ind.predicted_mean);
        actual.push_back(ind.eval.fitness);
      }
    }
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (is_full[i]) continue;
      auto& ind = pop[i];
      ind.eval = partial[i].result;
      ind.eval.fitness = std::clamp(ind.predicted_mean, 0.0, 1.0);
      ind.eval.provenance = nn::Provenance::Surrogate;
      ind.diverged = partial[i].diverged;
    }
    stats.n_full = chosen.size();
    stats.n_surrogate = pop.size() - chosen.size();
    if (!predicted.empty()) stats.fit = fit_report(predicted, actual);
    eval_.end_generation();
  }

  std::vector<Individual> breed(const std::vector<Individual>& pop, std::size_t generation) {
    std::vector<Contender> contenders;
    for (const auto& ind : pop) contenders.push_back({ind.eval.fitness, ind.eval.param_count});
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return beats(contenders[a], a, contenders[b], b);
    });

    std::vector<Individual> next;
    for (std::size_t e = 0; e < cfg_.variation.elitism; ++e) {
      const auto& src = pop[order[e]];
      next.push_back(make_individual(src.genome, src.born));
      next.back().elite = true;
    }
    while (next.size() < cfg_.population) {
      const auto [i, j] = select_parents(contenders, rng_, cfg_.variation);
      Genome a = pop[i].repaired, b = pop[j].repaired;
      if (rng_.bernoulli(cfg_.variation.p_crossover)) std::tie(a, b) = crossover(a, b, rng_);
      for (Genome* child : {&a, &b}) {
        if (rng_.bernoulli(cfg_.variation.p_mutation)) *child = mutate(*child, rng_, cfg_.variation, cfg_.genome);
        *child = truncate(*child, cfg_.genome.max_length);
        if (next.size() < cfg_.population) next.push_back(make_individual(std::move(*child), generation));
      }
    }
    for (std::size_t i = 0; i < next.size(); ++i) next[i].index = i;
    return next;
  }

  void finish_generation(std::vector<Individual> pop, GenerationStats& stats) {
    std::vector<double> fit;
    for (const auto& ind : pop) fit.push_back(ind.eval.fitness);
    stats.best_fitness = *std::max_element(fit.begin(), fit.end());
    stats.mean_fitness = std::accumulate(fit.begin(), fit.end(), 0.0) / static_cast<double>(fit.size());
    std::vector<double> sorted = fit;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    stats.median_fitness = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    for (const auto& ind : pop) {
      if (ind.eval.provenance != nn::Provenance::Full) continue;
      const Contender c{ind.eval.fitness, ind.eval.param_count};
      const Contender b{result_.best.eval.fitness, result_.best.eval.param_count};
      // Earlier individuals keep priority on exact ties.
      if (!have_best_ || beats(c, 1, b, 0)) {
        result_.best = ind;
        have_best_ = true;
      }
    }
    best_full_ = have_best_ ? result_.best.eval.fitness : 0.0;
    stats.best_full_so_far = best_full_;
    result_.total_cost += stats.cost_units;
    stats.cumulative_cost = result_.total_cost;
    stats.archive_size = archive_.size();
    stats.archive_additions = archive_additions_;

    if (obs_) obs_(stats, pop);
    result_.generations.push_back(stats);
    result_.populations.push_back(std::move(pop));
  }

  RunConfig cfg_;
  Evaluator& eval_;
  const GenerationObserver& obs_;
  Rng rng_;
  Archive archive_;
  std::size_t archive_additions_ = 0;
  double best_full_ = 0.0;
  bool have_best_ = false;
  RunResult result_;
};

}  // namespace

RunResult run_baseline(const RunConfig& cfg, Evaluator& eval, const GenerationObserver& obs) {
  if (cfg.mode != Mode::Baseline) throw ConfigError("run_baseline needs mode baseline");
  return Engine(cfg, eval, obs).baseline();
}

RunResult run_expensive(const RunConfig& cfg, Evaluator& eval, const GenerationObserver& obs) {
  if (cfg.mode != Mode::Expensive) throw ConfigError("run_expensive needs mode expensive");
  return Engine(cfg, eval, obs).evolve(false);
}

RunResult run_surrogate(const RunConfig& cfg, Evaluator& eval, const GenerationObserver& obs) {
  if (cfg.mode != Mode::Surrogate) throw ConfigError("run_surrogate needs mode surrogate");
  return Engine(cfg, eval, obs).evolve(true);
}

RunResult run(const RunConfig& cfg, Evaluator& eval, const GenerationObserver& obs) {
  switch (cfg.mode) {
    case Mode::Baseline: return run_baseline(cfg, eval, obs);
    case Mode::Expensive: return run_expensive(cfg, eval, obs);
    case Mode::Surrogate: return run_surrogate(cfg, eval, obs);
  }
  throw ConfigError("unknown mode");
}

// ---------------------------------------------------------------- output

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

nlohmann::ordered_json json_num(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + p.string());
  return os;
}

}  // namespace

RunWriter::RunWriter(const std::filesystem::path& dir, const RunConfig& cfg) : dir_(dir), cfg_(cfg) {
  std::filesystem::create_directories(dir_);
  runlog_ = open_out(dir_ / "runlog.jsonl");
  generations_ = open_out(dir_ / "generations.csv");
  generations_ << "generation,n_full,n_surrogate,best_fitness,mean_fitness,median_fitness,best_full_so_far,"
                  "cost_units,cumulative_cost,archive_size,mse,kendall_tau,r_squared,n_pairs,surrogate_fallback\n";
  generations_.flush();
  if (cfg_.mode == Mode::Surrogate) {
    surrogate_fit_ = open_out(dir_ / "surrogate_fit.csv");
    surrogate_fit_ << "generation,index,partial_fitness,predicted_mean,predicted_variance,expected_improvement,"
                      "actual_fitness\n";
    surrogate_fit_.flush();
  }
}

void RunWriter::operator()(const GenerationStats& s, std::span<const Individual> pop) {
  for (const auto& ind : pop) {
    nlohmann::ordered_json rec;
    rec["generation"] = s.generation;
    rec["index"] = ind.index;
    rec["born"] = ind.born;
    rec["elite"] = ind.elite;
    rec["genome"] = to_text(ind.genome, cfg_.genome);
    rec["repaired_genome"] = to_text(ind.repaired, cfg_.genome, true);
    nlohmann::ordered_json rules = nlohmann::ordered_json::array();
    for (auto r : ind.report.rules_applied) rules.push_back(std::string(to_string(r)));
    rec["repair"] = {{"rules", rules},
                     {"inserted", ind.report.instructions_inserted},
                     {"removed", ind.report.instructions_removed}};
    rec["architecture"] = describe(ind.arch);
    rec["param_count"] = ind.eval.param_count;
    rec["train_seed"] = ind.train_seed;
    rec["provenance"] = std::string(nn::to_string(ind.eval.provenance));
    rec["fitness"] = json_num(ind.eval.fitness);
    rec["epochs_trained"] = ind.eval.epochs_trained;
    rec["cost_units"] = json_num(ind.cost_units);
    rec["diverged"] = ind.diverged;
    rec["partial_fitness"] = json_num(ind.partial_fitness);
    rec["predicted_mean"] = json_num(ind.predicted_mean);
    rec["predicted_variance"] = json_num(ind.predicted_variance);
    rec["expected_improvement"] = json_num(ind.expected_improvement);
    runlog_ << rec.dump() << '\n';

    if (surrogate_fit_.is_open() && ind.eval.provenance == nn::Provenance::Full && !std::isnan(ind.predicted_mean))
      surrogate_fit_ << s.generation << ',' << ind.index << ',' << num(ind.partial_fitness) << ','
                     << num(ind.predicted_mean) << ',' << num(ind.predicted_variance) << ','
                     << num(ind.expected_improvement) << ',' << num(ind.eval.fitness) << '\n';
  }
  if (!s.note.empty()) {
    nlohmann::ordered_json ev;
    ev["generation"] = s.generation;
    ev["event"] = "surrogate_fallback";
    ev["message"] = s.note;
    runlog_ << ev.dump() << '\n';
  }
  generations_ << s.generation << ',' << s.n_full << ',' << s.n_surrogate << ',' << num(s.best_fitness) << ','
               << num(s.mean_fitness) << ',' << num(s.median_fitness) << ',' << num(s.best_full_so_far) << ','
               << num(s.cost_units) << ',' << num(s.cumulative_cost) << ',' << s.archive_size << ','
               << num(s.fit.mse) << ',' << num(s.fit.kendall_tau) << ',' << num(s.fit.r_squared) << ','
               << s.fit.n_pairs << ',' << (s.surrogate_fallback ? 1 : 0) << '\n';
  runlog_.flush();
  generations_.flush();
  if (surrogate_fit_.is_open()) surrogate_fit_.flush();
}

void RunWriter::finish(const RunResult& result) {
  auto os = open_out(dir_ / "best_genome.txt");
  const auto& b = result.best;
  os << "# fitness " << num(b.eval.fitness) << "\n";
  os << "# parameters " << b.eval.param_count << "\n";
  os << "# architecture " << describe(b.arch) << "\n";
  os << to_text(b.repaired, cfg_.genome, true) << '\n';
}

}  // namespace nlgp
