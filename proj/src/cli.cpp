#include "neurolgp/cli.hpp"

#include <Eigen/Core>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "neurolgp/errors.hpp"
#include "neurolgp/nn/shape.hpp"

namespace nlgp::cli {

namespace {

Mode checked_mode(const std::string& s) {
  if (auto m = parse_mode(s)) return *m;
  throw ConfigError("unknown mode '" + s + "' (expected baseline, expensive or surrogate)");
}

void write_manifest(const CliConfig& cfg, const std::filesystem::path& dir) {
  nlohmann::ordered_json m;
  m["name"] = "neurolgp";
  m["version"] = NEUROLGP_VERSION;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["mode"] = std::string(to_string(cfg.run.mode));
  m["backend"] = std::string(to_string(cfg.backend));
  m["seed"] = cfg.run.seed;
  m["config_hash"] = config_hash(cfg);
  m["config"] = nlohmann::ordered_json::parse(config_to_json(cfg, -1));
  m["config"].erase("out");
  nlohmann::ordered_json files = {"runlog.jsonl", "generations.csv", "best_genome.txt"};
  if (cfg.run.mode == Mode::Surrogate) files.push_back("surrogate_fit.csv");
  m["outputs"] = files;
  std::ofstream os(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + (dir / "manifest.json").string());
  os << m.dump(2) << '\n';
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

/// Runs one configuration into its output directory.
RunResult execute(const CliConfig& cfg, std::ostream& out) {
  std::filesystem::create_directories(cfg.out);
  write_manifest(cfg, cfg.out);
  auto evaluator = make_evaluator(cfg.run, cfg.backend);
  RunWriter writer(cfg.out, cfg.run);
  auto result = run(cfg.run, *evaluator, [&](const GenerationStats& s, std::span<const Individual> pop) {
    writer(s, pop);
    out << to_string(cfg.run.mode) << " gen " << s.generation << ": best " << fmt(s.best_fitness) << " mean "
        << fmt(s.mean_fitness) << " best-so-far " << fmt(s.best_full_so_far) << " cost " << s.cumulative_cost;
    if (s.fit.n_pairs > 0) out << " tau " << fmt(s.fit.kendall_tau, 3);
    if (s.surrogate_fallback) out << " (surrogate fallback)";
    out << '\n';
  });
  writer.finish(result);
  return result;
}

}  // namespace

CliConfig resolve(const Overrides& o) {
  CliConfig cfg = o.config ? load_config(*o.config) : parse_config("{}");
  if (o.mode) cfg.run.mode = checked_mode(*o.mode);
  if (o.backend) {
    auto b = parse_backend(*o.backend);
    if (!b) throw ConfigError("unknown backend '" + *o.backend + "' (expected trainer or proxy)");
    cfg.backend = *b;
  }
  if (o.seed) cfg.run.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.runs) {
    if (*o.runs < 1) throw ConfigError("--runs must be >= 1");
    cfg.runs = *o.runs;
  }
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (!o.modes.empty()) {
    cfg.modes.clear();
    for (const auto& m : o.modes) cfg.modes.push_back(checked_mode(m));
  }
  cfg.run.validate();
  return cfg;
}

int cmd_run(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.run.validate();
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const auto result = execute(cfg, out);
    out << "best fitness " << fmt(result.best.eval.fitness) << " (" << describe(result.best.arch) << ", "
        << result.best.eval.param_count << " parameters), cost " << result.total_cost << " epoch-units\n";
    out << "wrote " << cfg.out.string() << '\n';
    return kOk;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_batch(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seeds.empty())
    for (std::size_t i = 0; i < cfg.runs; ++i) seeds.push_back(cfg.run.seed + i);
  try {
    cfg.run.validate();
    std::filesystem::create_directories(cfg.out);
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }

  std::ofstream summary(cfg.out / "batch_summary.csv", std::ios::binary | std::ios::trunc);
  if (!summary) {
    err << "cannot write " << (cfg.out / "batch_summary.csv").string() << '\n';
    return kRuntimeError;
  }
  summary << "mode,seed,status,best_fitness,best_param_count,total_cost,generations,run_dir,message\n";
  int failures = 0;
  for (Mode mode : cfg.modes) {
    for (auto seed : seeds) {
      CliConfig one = cfg;
      one.run.mode = mode;
      one.run.seed = seed;
      const std::string name = std::string(to_string(mode)) + "_seed" + std::to_string(seed);
      one.out = cfg.out / name;
      std::ostringstream sink;
      try {
        one.run.validate();
        const auto r = execute(one, sink);
        char best[32];
        std::snprintf(best, sizeof best, "%.17g", r.best.eval.fitness);
        summary << to_string(mode) << ',' << seed << ",ok," << best << ',' << r.best.eval.param_count << ','
                << r.total_cost << ',' << r.generations.size() << ',' << name << ",\n";
        out << name << ": best " << fmt(r.best.eval.fitness) << ", cost " << r.total_cost << '\n';
      } catch (const std::exception& e) {
        ++failures;
        std::string msg = e.what();
        for (char& c : msg)
          if (c == ',' || c == '\n' || c == '"') c = ' ';
        summary << to_string(mode) << ',' << seed << ",failed,,,,," << name << ',' << msg << '\n';
        err << name << " failed: " << e.what() << '\n';
      }
      summary.flush();
    }
  }
  out << "wrote " << (cfg.out / "batch_summary.csv").string() << '\n';
  return failures == 0 ? kOk : kRuntimeError;
}

int cmd_validate(const std::filesystem::path& file, const TensorShape& input, int num_classes,
                 std::ostream& out, std::ostream& err) {
  std::ifstream is(file);
  if (!is) {
    err << "cannot read " << file.string() << '\n';
    return kConfigError;
  }
  std::stringstream ss;
  ss << is.rdbuf();
  Genome g;
  try {
    g = from_text(ss.str());
  } catch (const ParseError& e) {
    err << file.string() << ":" << e.line() << ": " << e.what() << '\n';
    return kConfigError;
  }

  const GenomeConfig gcfg;
  RepairConfig rcfg;
  rcfg.num_classes = num_classes;

  auto show = [&](const Genome& genome) {
    const auto eff = effective_indices(genome);
    if (eff.empty()) {
      out << "effective chain: empty (no instruction reaches r[0])\n";
      return;
    }
    const auto arch = decode(genome, input, num_classes, gcfg);
    out << "effective chain (" << arch.layers.size() << " layers) on " << input.str() << ":\n";
    std::vector<TensorShape> shapes;
    std::string shape_error;
    try {
      shapes = propagate_shape(arch);
    } catch (const ShapeExhausted& e) {
      shape_error = e.what();
    }
    std::vector<std::int64_t> params;
    if (shape_error.empty()) params = layer_param_counts(arch);
    for (std::size_t i = 0; i < eff.size(); ++i) {
      out << "  line " << std::setw(2) << eff[i] + 1 << "  " << std::left << std::setw(26)
          << format_instruction(genome.instructions[eff[i]], gcfg.catalogue) << std::right;
      if (i < shapes.size()) out << " -> " << std::setw(10) << shapes[i].str() << "  params " << params[i];
      out << '\n';
    }
    if (!shape_error.empty()) {
      out << "shapes: " << shape_error << '\n';
    } else {
      out << "  head  Dense(" << num_classes << ") + softmax" << std::string(12, ' ') << "params "
          << params.back() << '\n';
      out << "parameters: " << param_count(arch) << '\n';
    }
  };

  show(g);
  const auto rr = repair(g, input, rcfg);
  if (rr.report.empty()) {
    out << "repair: none needed\n";
    return kOk;
  }
  out << "repair:";
  for (auto r : rr.report.rules_applied) out << ' ' << to_string(r);
  out << " (inserted " << rr.report.instructions_inserted << ", removed " << rr.report.instructions_removed
      << ")\nrepaired genome:\n"
      << to_text(rr.genome, gcfg, true) << '\n';
  show(rr.genome);
  return kRepaired;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Register-based neuroevolution with surrogate-assisted fitness evaluation", "neurolgp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(NEUROLGP_VERSION));

  Overrides o;
  std::string config, mode, backend, outdir;
  std::uint64_t seed = 0;
  std::size_t runs = 0;

  auto* run_cmd = app.add_subcommand("run", "Run one experimental arm");
  run_cmd->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
  run_cmd->add_option("--mode", mode, "baseline | expensive | surrogate")
      ->check(CLI::IsMember({"baseline", "expensive", "surrogate"}));
  run_cmd->add_option("--seed", seed, "Run seed");
  run_cmd->add_option("--out", outdir, "Output directory");
  run_cmd->add_option("--backend", backend, "trainer | proxy")->check(CLI::IsMember({"trainer", "proxy"}));

  auto* batch_cmd = app.add_subcommand("batch", "Run several seeds of several arms");
  batch_cmd->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
  batch_cmd->add_option("--seeds", o.seeds, "Explicit run seeds");
  batch_cmd->add_option("--runs", runs, "Number of consecutive seeds starting at --seed");
  batch_cmd->add_option("--seed", seed, "First seed when --runs is used");
  batch_cmd->add_option("--modes", o.modes, "Arms to run (default: all three)")
      ->check(CLI::IsMember({"baseline", "expensive", "surrogate"}));
  batch_cmd->add_option("--out", outdir, "Output directory");
  batch_cmd->add_option("--backend", backend, "trainer | proxy")->check(CLI::IsMember({"trainer", "proxy"}));

  auto* validate_cmd = app.add_subcommand("validate", "Analyse and repair a genome listing");
  std::string genome_file, input = "16x16x1";
  int classes = 3;
  validate_cmd->add_option("file", genome_file, "Genome listing")->required();
  validate_cmd->add_option("--input", input, "Input shape HxWxC");
  validate_cmd->add_option("--classes", classes, "Number of output classes")->check(CLI::Range(2, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return kConfigError;
  }

  if (!config.empty()) o.config = config;
  if (!mode.empty()) o.mode = mode;
  if (!backend.empty()) o.backend = backend;
  if (!outdir.empty()) o.out = outdir;

  if (*validate_cmd) {
    const auto shape = parse_shape(input);
    if (!shape) {
      err << "invalid --input shape '" << input << "' (expected HxWxC)\n";
      return kConfigError;
    }
    return cmd_validate(genome_file, *shape, classes, out, err);
  }

  CliConfig cfg;
  try {
    if (run_cmd->count("--seed") > 0 || batch_cmd->count("--seed") > 0) o.seed = seed;
    if (runs > 0) o.runs = runs;
    cfg = resolve(o);
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }
  return *run_cmd ? cmd_run(cfg, out, err) : cmd_batch(cfg, out, err);
}

}  // namespace nlgp::cli
