#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>
#include <vector>

#include "neurolgp/config.hpp"
#include "neurolgp/engine.hpp"
#include "neurolgp/errors.hpp"
#include "neurolgp/genome.hpp"
#include "neurolgp/metrics.hpp"
#include "neurolgp/nn/proxy.hpp"
#include "neurolgp/nn/shape.hpp"
#include "neurolgp/repair.hpp"
#include "neurolgp/surrogate.hpp"

namespace py = pybind11;
using namespace nlgp;

namespace {

TensorShape to_shape(const std::string& text) {
  if (auto s = parse_shape(text)) return *s;
  throw ConfigError("bad shape '" + text + "' (expected HxWxC)");
}

std::vector<std::string> layer_names(const ArchitectureDescriptor& arch) {
  std::vector<std::string> names;
  for (const auto& op : arch.layers) names.push_back(layer_name(op));
  return names;
}

py::dict individual_dict(const Individual& ind) {
  py::dict d;
  d["generation"] = ind.born;
  d["index"] = ind.index;
  d["genome"] = to_text(ind.repaired);
  d["architecture"] = describe(ind.arch);
  d["fitness"] = ind.eval.fitness;
  d["provenance"] = std::string(nn::to_string(ind.eval.provenance));
  d["predicted_mean"] = ind.predicted_mean;
  d["expected_improvement"] = ind.expected_improvement;
  return d;
}

py::dict run_dict(const RunResult& r) {
  py::list gens;
  for (const auto& g : r.generations) {
    py::dict d;
    d["generation"] = g.generation;
    d["best_fitness"] = g.best_fitness;
    d["mean_fitness"] = g.mean_fitness;
    d["best_full_so_far"] = g.best_full_so_far;
    d["cost_units"] = g.cost_units;
    d["cumulative_cost"] = g.cumulative_cost;
    d["n_full"] = g.n_full;
    d["n_surrogate"] = g.n_surrogate;
    d["kendall_tau"] = g.fit.kendall_tau;
    d["mse"] = g.fit.mse;
    d["r_squared"] = g.fit.r_squared;
    gens.append(d);
  }
  py::dict out;
  out["mode"] = std::string(to_string(r.config.mode));
  out["seed"] = r.config.seed;
  out["generations"] = gens;
  out["best"] = individual_dict(r.best);
  out["total_cost"] = r.total_cost;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Linear genetic programming neuroevolution with a Kriging surrogate";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<Instruction>(m, "Instruction")
      .def(py::init<int, int, int>(), py::arg("dest"), py::arg("op"), py::arg("src"))
      .def_readwrite("dest", &Instruction::dest)
      .def_readwrite("op", &Instruction::op)
      .def_readwrite("src", &Instruction::src)
      .def("__eq__", [](const Instruction& a, const Instruction& b) { return a == b; })
      .def("__repr__", [](const Instruction& i) {
        return format_instruction(i, Catalogue::standard());
      });

  py::class_<Genome>(m, "Genome")
      .def(py::init<>())
      .def(py::init([](std::vector<Instruction> ins) { return Genome{std::move(ins)}; }))
      .def_readwrite("instructions", &Genome::instructions)
      .def_static("from_text", [](const std::string& text) { return from_text(text); }, py::arg("text"))
      .def_static("random", [](std::uint64_t seed) {
        Rng rng(seed);
        return random_genome(rng);
      }, py::arg("seed"))
      .def("to_text", [](const Genome& g, bool annotate) { return to_text(g, {}, annotate); },
           py::arg("annotate") = false)
      .def("effective_indices", &effective_indices)
      .def("strip_introns", &strip_introns)
      .def("__len__", &Genome::size)
      .def("__eq__", [](const Genome& a, const Genome& b) { return a == b; })
      .def("__repr__", [](const Genome& g) { return to_text(g); });

  m.def("decode", [](const Genome& g, const std::string& shape, int num_classes) {
    return layer_names(decode(g, to_shape(shape), num_classes));
  }, py::arg("genome"), py::arg("shape") = "16x16x1", py::arg("num_classes") = 3,
        "Layer names of the effective chain.");

  m.def("describe", [](const Genome& g, const std::string& shape, int num_classes) {
    return describe(decode(g, to_shape(shape), num_classes));
  }, py::arg("genome"), py::arg("shape") = "16x16x1", py::arg("num_classes") = 3);

  m.def("param_count", [](const Genome& g, const std::string& shape, int num_classes) {
    return param_count(decode(g, to_shape(shape), num_classes));
  }, py::arg("genome"), py::arg("shape") = "16x16x1", py::arg("num_classes") = 3);

  m.def("repair", [](const Genome& g, const std::string& shape, int num_classes) {
    RepairConfig cfg;
    cfg.num_classes = num_classes;
    const auto r = repair(g, to_shape(shape), cfg);
    std::vector<std::string> rules;
    for (auto rule : r.report.rules_applied) rules.emplace_back(to_string(rule));
    return py::make_tuple(r.genome, rules);
  }, py::arg("genome"), py::arg("shape") = "16x16x1", py::arg("num_classes") = 3,
        "Returns (repaired genome, names of the rules applied).");

  m.def("proxy_fitness", [](const Genome& g, const std::string& shape, int num_classes) {
    return nn::proxy_fitness(decode(g, to_shape(shape), num_classes));
  }, py::arg("genome"), py::arg("shape") = "16x16x1", py::arg("num_classes") = 3);

  m.def("expected_improvement", &expected_improvement, py::arg("mean"), py::arg("variance"), py::arg("f_best"));
  m.def("kendall_tau", [](const std::vector<double>& p, const std::vector<double>& a) { return kendall_tau(p, a); },
        py::arg("predicted"), py::arg("actual"));
  m.def("mse", [](const std::vector<double>& p, const std::vector<double>& a) { return mse(p, a); },
        py::arg("predicted"), py::arg("actual"));
  m.def("r_squared", [](const std::vector<double>& p, const std::vector<double>& a) { return r_squared(p, a); },
        py::arg("predicted"), py::arg("actual"));
  m.def("cost_reduction", &cost_reduction, py::arg("expensive_cost"), py::arg("surrogate_cost"));

  m.def("modeled_cost", [](const std::string& config_json) {
    return modeled_cost(parse_config(config_json).run);
  }, py::arg("config_json") = "{}", "Epoch-units the configured run consumes.");

  m.def("default_config", [] { return config_to_json(CliConfig{}); });

  m.def("run", [](const std::string& config_json, const py::object& on_generation) {
    const CliConfig cfg = parse_config(config_json);
    std::unique_ptr<Evaluator> evaluator;
    RunResult result;
    {
      py::gil_scoped_release release;
      evaluator = make_evaluator(cfg.run, cfg.backend);
    }
    GenerationObserver obs;
    if (!on_generation.is_none())
      obs = [&](const GenerationStats& s, std::span<const Individual>) {
        py::gil_scoped_acquire acquire;
        on_generation(s.generation, s.best_full_so_far, s.cumulative_cost);
      };
    {
      py::gil_scoped_release release;
      result = run(cfg.run, *evaluator, obs);
    }
    return run_dict(result);
  }, py::arg("config_json") = "{}", py::arg("on_generation") = py::none(),
        "Runs one configured arm and returns its per-generation statistics and best individual.");
}
