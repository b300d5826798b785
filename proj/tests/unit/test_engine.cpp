#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "neurolgp/engine.hpp"
#include "neurolgp/errors.hpp"
#include "neurolgp/nn/shape.hpp"

using namespace nlgp;

namespace {

RunConfig proxy_config(Mode mode, std::uint64_t seed) {
  RunConfig c;
  c.mode = mode;
  c.seed = seed;
  return c;
}

RunResult proxy_run(const RunConfig& c) {
  ProxyEvaluator ev({c.proxy_validation_rows, c.data.n_classes, c.full_epochs});
  return run(c, ev);
}

// Every individual of a finished run, one line each.
std::string fingerprint(const RunResult& r) {
  std::ostringstream os;
  for (const auto& pop : r.populations)
    for (const auto& ind : pop)
      os << ind.born << ' ' << ind.elite << ' ' << to_text(ind.genome) << '|' << describe(ind.arch) << '|'
         << ind.eval.fitness << ' ' << ind.cost_units << ' ' << nn::to_string(ind.eval.provenance) << '\n';
  return os.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::shared_ptr<const PreparedData> tiny_data() {
  DataConfig d;
  d.shape = {8, 8, 1};
  d.base_count = 12;
  return std::make_shared<const PreparedData>(prepare(generate(d, 3), 3, 3));
}

RunConfig tiny_trainer_config(Mode mode) {
  RunConfig c;
  c.mode = mode;
  c.population = 6;
  c.generations = 3;
  c.full_epochs = 3;
  c.partial_epochs = 1;
  c.surrogate_fraction = 0.5;
  c.data.shape = {8, 8, 1};
  c.data.base_count = 12;
  c.smote_k = 3;
  c.seed = 4;
  return c;
}

}  // namespace

TEST(CostModel, ReferenceParameters) {
  RunConfig c;
  c.mode = Mode::Baseline;
  EXPECT_EQ(modeled_cost(c), 22500.0);
  c.mode = Mode::Expensive;
  EXPECT_EQ(modeled_cost(c), 22500.0);
  c.mode = Mode::Surrogate;
  EXPECT_EQ(full_evaluations_per_generation(c), 20u);
  EXPECT_EQ(modeled_cost(c), 16900.0);
  EXPECT_NEAR(cost_reduction(22500.0, modeled_cost(c)), 24.9, 0.05);
  c.surrogate_fraction = 0.0;
  EXPECT_EQ(modeled_cost(c), 22500.0);
  EXPECT_EQ(cost_reduction(22500.0, modeled_cost(c)), 0.0);
}

TEST(CostModel, FullCountRoundsUp) {
  RunConfig c;
  c.population = 10;
  c.surrogate_fraction = 0.6;
  EXPECT_EQ(full_evaluations_per_generation(c), 4u);
  c.surrogate_fraction = 0.55;
  EXPECT_EQ(full_evaluations_per_generation(c), 5u);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.partial_epochs = 30;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.surrogate_fraction = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.population = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  EXPECT_NO_THROW(c.validate());
}

TEST(Modes, NamesRoundTrip) {
  for (auto m : {Mode::Baseline, Mode::Expensive, Mode::Surrogate}) EXPECT_EQ(parse_mode(to_string(m)), m);
  for (auto b : {Backend::Trainer, Backend::Proxy}) EXPECT_EQ(parse_backend(to_string(b)), b);
  EXPECT_FALSE(parse_mode("fast").has_value());
}

TEST(TrainingSeed, DependsOnArchitectureOnly) {
  const ArchitectureDescriptor a{{LayerOp::conv(8, 3), LayerOp::dense()}, {16, 16, 1}, 3};
  ArchitectureDescriptor b = a;
  EXPECT_EQ(training_seed(1, a), training_seed(1, b));
  b.layers[0] = LayerOp::conv(16, 3);
  EXPECT_NE(training_seed(1, a), training_seed(1, b));
  EXPECT_NE(training_seed(1, a), training_seed(2, a));
}

TEST(Baseline, CostAndValidity) {
  const auto r = proxy_run(proxy_config(Mode::Baseline, 1));
  EXPECT_EQ(r.total_cost, 22500.0);
  ASSERT_EQ(r.populations.size(), 15u);
  std::size_t n = 0;
  for (const auto& pop : r.populations) {
    ASSERT_EQ(pop.size(), 50u);
    for (const auto& ind : pop) {
      ++n;
      ASSERT_EQ(ind.arch.layers.front().kind, LayerKind::Conv);
      ASSERT_EQ(ind.arch.layers.back().kind, LayerKind::Dense);
      ASSERT_NO_THROW(propagate_shape(ind.arch));
      ASSERT_LE(param_count(ind.arch), r.config.max_params);
      EXPECT_EQ(ind.eval.provenance, nn::Provenance::Full);
      EXPECT_EQ(ind.eval.epochs_trained, 30);
    }
  }
  EXPECT_EQ(n, 750u);
}

TEST(Baseline, Deterministic) {
  EXPECT_EQ(fingerprint(proxy_run(proxy_config(Mode::Baseline, 2))),
            fingerprint(proxy_run(proxy_config(Mode::Baseline, 2))));
}

TEST(Expensive, CostAndMonotoneBest) {
  const auto r = proxy_run(proxy_config(Mode::Expensive, 3));
  EXPECT_EQ(r.total_cost, 22500.0);
  const auto traj = r.best_trajectory();
  ASSERT_EQ(traj.size(), 15u);
  EXPECT_TRUE(std::is_sorted(traj.begin(), traj.end()));
  EXPECT_EQ(traj.back(), r.best.eval.fitness);
  for (std::size_t g = 1; g < r.populations.size(); ++g)
    EXPECT_EQ(std::count_if(r.populations[g].begin(), r.populations[g].end(), [](auto& i) { return i.elite; }), 1);
}

TEST(Expensive, BeatsRandomSearchOnAverage) {
  double expensive = 0.0, baseline = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    expensive += proxy_run(proxy_config(Mode::Expensive, s)).best.eval.fitness;
    baseline += proxy_run(proxy_config(Mode::Baseline, s)).best.eval.fitness;
  }
  EXPECT_GE(expensive, baseline);
}

TEST(Surrogate, CostAndArchiveAccounting) {
  const auto r = proxy_run(proxy_config(Mode::Surrogate, 4));
  EXPECT_EQ(r.total_cost, 16900.0);
  ASSERT_EQ(r.generations.size(), 15u);
  EXPECT_EQ(r.generations[0].cost_units, 1500.0);
  EXPECT_EQ(r.generations[0].n_full, 50u);
  double last = 0.0;
  for (std::size_t g = 0; g < r.generations.size(); ++g) {
    const auto& s = r.generations[g];
    EXPECT_GE(s.cumulative_cost, last);
    last = s.cumulative_cost;
    EXPECT_EQ(s.archive_additions, 50 + 20 * g);
    EXPECT_LE(s.archive_size, s.archive_additions);
    if (g == 0) continue;
    if (s.surrogate_fallback) continue;
    EXPECT_EQ(s.cost_units, 1100.0);
    EXPECT_EQ(s.n_full, 20u);
    EXPECT_EQ(s.n_surrogate, 30u);
  }
  EXPECT_NEAR(cost_reduction(22500.0, r.total_cost), 24.9, 0.05);
}

TEST(Surrogate, ProvenanceContract) {
  const auto r = proxy_run(proxy_config(Mode::Surrogate, 5));
  const std::size_t width = r.populations[0][0].eval.phenotype.size();
  for (std::size_t g = 1; g < r.populations.size(); ++g) {
    if (r.generations[g].surrogate_fallback) continue;
    for (const auto& ind : r.populations[g]) {
      EXPECT_GE(ind.eval.fitness, 0.0);
      EXPECT_LE(ind.eval.fitness, 1.0);
      EXPECT_EQ(ind.eval.phenotype.size(), width);
      EXPECT_FALSE(std::isnan(ind.partial_fitness));
      EXPECT_FALSE(std::isnan(ind.expected_improvement));
      if (ind.eval.provenance == nn::Provenance::Surrogate) {
        EXPECT_EQ(ind.eval.epochs_trained, 10);
        EXPECT_EQ(ind.cost_units, 10.0);
        EXPECT_EQ(ind.eval.fitness, std::clamp(ind.predicted_mean, 0.0, 1.0));
      } else {
        EXPECT_EQ(ind.eval.provenance, nn::Provenance::Full);
        EXPECT_EQ(ind.eval.epochs_trained, 30);
        EXPECT_EQ(ind.cost_units, 40.0);
      }
    }
  }
}

TEST(Surrogate, FullSubsetIsTopExpectedImprovement) {
  const auto r = proxy_run(proxy_config(Mode::Surrogate, 6));
  for (std::size_t g = 1; g < r.populations.size(); ++g) {
    if (r.generations[g].surrogate_fallback) continue;
    double min_full = INFINITY, max_sur = -INFINITY;
    for (const auto& ind : r.populations[g]) {
      if (ind.eval.provenance == nn::Provenance::Full) min_full = std::min(min_full, ind.expected_improvement);
      else max_sur = std::max(max_sur, ind.expected_improvement);
    }
    EXPECT_GE(min_full, max_sur);
  }
}

TEST(Surrogate, Deterministic) {
  EXPECT_EQ(fingerprint(proxy_run(proxy_config(Mode::Surrogate, 7))),
            fingerprint(proxy_run(proxy_config(Mode::Surrogate, 7))));
}

TEST(Surrogate, ZeroFractionMatchesExpensive) {
  auto s = proxy_config(Mode::Surrogate, 8);
  s.surrogate_fraction = 0.0;
  s.generations = 6;
  auto e = s;
  e.mode = Mode::Expensive;
  const auto rs = proxy_run(s), re = proxy_run(e);
  EXPECT_EQ(rs.total_cost, re.total_cost);
  EXPECT_EQ(fingerprint(rs), fingerprint(re));
}

TEST(Writer, ProducesIdenticalFilesForIdenticalRuns) {
  const auto root = std::filesystem::temp_directory_path() / "neurolgp_writer_test";
  std::filesystem::remove_all(root);
  auto c = proxy_config(Mode::Surrogate, 9);
  c.population = 12;
  c.generations = 4;
  for (const char* name : {"a", "b"}) {
    RunWriter w(root / name, c);
    ProxyEvaluator ev({c.proxy_validation_rows, c.data.n_classes, c.full_epochs});
    const auto r = run(c, ev, std::ref(w));
    w.finish(r);
  }
  for (const char* f : {"runlog.jsonl", "generations.csv", "surrogate_fit.csv", "best_genome.txt"}) {
    const auto a = slurp(root / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(root / "b" / f)) << f;
  }
  const auto log = slurp(root / "a" / "runlog.jsonl");
  EXPECT_GE(std::count(log.begin(), log.end(), '\n'), 48);
  const auto gens = slurp(root / "a" / "generations.csv");
  EXPECT_EQ(std::count(gens.begin(), gens.end(), '\n'), 5);
  EXPECT_EQ(gens.rfind("generation,n_full,n_surrogate,best_fitness", 0), 0u);
  std::filesystem::remove_all(root);
}

TEST(TrainerEvaluator, MemoisedMatchesFreshTraining) {
  const auto data = tiny_data();
  const ArchitectureDescriptor arch{{LayerOp::conv(8, 3), LayerOp::max_pool(2), LayerOp::dense()}, {8, 8, 1}, 3};
  TrainerEvaluator memo(data, {}, 3), fresh(data, {}, 0, false);
  const auto partial = memo.evaluate(arch, 5, 1);
  const auto full = memo.evaluate(arch, 5, 3);
  EXPECT_EQ(memo.epochs_computed(), 3);
  const auto again = memo.evaluate(arch, 5, 3);
  EXPECT_EQ(memo.epochs_computed(), 3);
  const auto ref = fresh.evaluate(arch, 5, 3, 1);
  EXPECT_EQ(full.result.fitness, ref.result.fitness);
  EXPECT_EQ(full.result.phenotype, ref.result.phenotype);
  EXPECT_EQ(again.result.phenotype, ref.result.phenotype);
  ASSERT_TRUE(ref.captured.has_value());
  EXPECT_EQ(partial.result.phenotype, ref.captured->phenotype);
  EXPECT_EQ(full.result.cost_units, 3.0);
  EXPECT_EQ(fresh.phenotype_size(), data->validation.size() * 3);
}

TEST(TrainerEvaluator, RunsMatchWithAndWithoutMemoisation) {
  const auto data = tiny_data();
  for (auto mode : {Mode::Expensive, Mode::Surrogate}) {
    const auto c = tiny_trainer_config(mode);
    TrainerEvaluator memo(data, c.train, c.full_epochs), fresh(data, c.train, 0, false);
    const auto a = run(c, memo), b = run(c, fresh);
    EXPECT_EQ(fingerprint(a), fingerprint(b));
    EXPECT_EQ(a.total_cost, b.total_cost);
    EXPECT_LE(memo.epochs_computed(), fresh.epochs_computed());
  }
}
