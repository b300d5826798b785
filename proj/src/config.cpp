#include "neurolgp/config.hpp"

#include <concepts>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "neurolgp/errors.hpp"

namespace nlgp {

namespace {

using json = nlohmann::ordered_json;

/// Reads the keys of one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    read(*it, key, out);
  }

  Section sub(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    auto it = j_.find(key);
    return Section(it == j_.end() ? empty : *it, path_ + key + ".");
  }

  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown configuration key '" + path_ + k + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "configuration " : "'" + path_.substr(0, path_.size() - 1) + "' "; }
  std::string name(const char* key) const { return "'" + path_ + key + "'"; }

  void read(const json& v, const char* key, double& out) {
    if (!v.is_number()) throw ConfigError(name(key) + " must be a number");
    out = v.get<double>();
  }
  void read(const json& v, const char* key, int& out) {
    if (!v.is_number_integer()) throw ConfigError(name(key) + " must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(name(key) + " is out of range");
    out = static_cast<int>(x);
  }
  void read(const json& v, const char* key, std::int64_t& out) {
    if (!v.is_number_integer()) throw ConfigError(name(key) + " must be an integer");
    out = v.get<std::int64_t>();
  }
  template <std::unsigned_integral U>
  void read(const json& v, const char* key, U& out) {
    if (!v.is_number_unsigned()) throw ConfigError(name(key) + " must be a non-negative integer");
    out = v.get<U>();
  }
  void read(const json& v, const char* key, std::string& out) {
    if (!v.is_string()) throw ConfigError(name(key) + " must be a string");
    out = v.get<std::string>();
  }
  void read(const json& v, const char* key, std::vector<std::uint64_t>& out) {
    if (!v.is_array()) throw ConfigError(name(key) + " must be an array");
    out.clear();
    for (const auto& e : v) {
      std::uint64_t x = 0;
      read(e, key, x);
      out.push_back(x);
    }
  }
  void read(const json& v, const char* key, std::vector<std::string>& out) {
    if (!v.is_array()) throw ConfigError(name(key) + " must be an array");
    out.clear();
    for (const auto& e : v) {
      std::string x;
      read(e, key, x);
      out.push_back(x);
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Mode mode_from(const std::string& s) {
  if (auto m = parse_mode(s)) return *m;
  throw ConfigError("unknown mode '" + s + "' (expected baseline, expensive or surrogate)");
}

}  // namespace

CliConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  CliConfig c;
  RunConfig& r = c.run;
  Section top(doc, "");

  std::string mode(to_string(r.mode)), backend(to_string(c.backend)), out = c.out.string();
  top.get("mode", mode);
  r.mode = mode_from(mode);
  top.get("backend", backend);
  if (auto b = parse_backend(backend)) c.backend = *b;
  else throw ConfigError("unknown backend '" + backend + "' (expected trainer or proxy)");
  top.get("out", out);
  c.out = out;
  top.get("runs", c.runs);
  top.get("seeds", c.seeds);
  std::vector<std::string> modes;
  top.get("modes", modes);
  if (top.has("modes")) {
    c.modes.clear();
    for (const auto& m : modes) c.modes.push_back(mode_from(m));
  }
  top.get("population", r.population);
  top.get("generations", r.generations);
  top.get("full_epochs", r.full_epochs);
  top.get("partial_epochs", r.partial_epochs);
  top.get("surrogate_fraction", r.surrogate_fraction);
  top.get("seed", r.seed);

  {
    auto s = top.sub("genome");
    s.get("registers", r.genome.registers);
    s.get("min_length", r.genome.min_length);
    s.get("max_length", r.genome.max_length);
    s.finish();
  }
  {
    auto s = top.sub("variation");
    s.get("p_mut_register", r.variation.p_mut_register);
    s.get("p_mut_operand", r.variation.p_mut_operand);
    s.get("p_mutation", r.variation.p_mutation);
    s.get("p_crossover", r.variation.p_crossover);
    s.get("tournament_size", r.variation.tournament_size);
    s.get("elitism", r.variation.elitism);
    s.finish();
  }
  {
    auto s = top.sub("repair");
    s.get("max_flatten", r.max_flatten);
    s.get("max_params", r.max_params);
    s.finish();
  }
  {
    auto s = top.sub("data");
    s.get("height", r.data.shape.height);
    s.get("width", r.data.shape.width);
    s.get("channels", r.data.shape.channels);
    s.get("classes", r.data.n_classes);
    s.get("base_count", r.data.base_count);
    s.get("imbalance", r.data.imbalance);
    s.get("noise", r.data.noise);
    s.get("min_scale", r.data.min_scale);
    s.get("max_scale", r.data.max_scale);
    s.get("max_shift", r.data.max_shift);
    s.get("train", r.data.train);
    s.get("validation", r.data.validation);
    s.get("test1", r.data.test1);
    s.get("test2", r.data.test2);
    s.get("seed", r.data_seed);
    s.get("smote_k", r.smote_k);
    s.finish();
  }
  {
    auto s = top.sub("train");
    s.get("batch_size", r.train.batch_size);
    s.get("learning_rate", r.train.learning_rate);
    s.get("momentum", r.train.momentum);
    s.finish();
  }
  {
    auto s = top.sub("surrogate");
    std::string kernel = r.surrogate.kind == KernelKind::KPLS ? "kpls" : "kriging";
    s.get("kernel", kernel);
    if (kernel == "kpls") r.surrogate.kind = KernelKind::KPLS;
    else if (kernel == "kriging") r.surrogate.kind = KernelKind::Kriging;
    else throw ConfigError("unknown surrogate kernel '" + kernel + "' (expected kpls or kriging)");
    s.get("h", r.surrogate.h);
    s.get("log10_theta_min", r.surrogate.log10_theta_min);
    s.get("log10_theta_max", r.surrogate.log10_theta_max);
    s.get("nugget", r.surrogate.nugget);
    s.get("nugget_max", r.surrogate.nugget_max);
    s.get("restarts", r.surrogate.restarts);
    s.get("max_evaluations", r.surrogate.max_evaluations);
    s.finish();
  }
  {
    auto s = top.sub("proxy");
    s.get("validation_rows", r.proxy_validation_rows);
    s.finish();
  }
  top.finish();

  if (c.runs < 1) throw ConfigError("'runs' must be >= 1");
  if (c.modes.empty()) throw ConfigError("'modes' must not be empty");
  try {
    r.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read configuration file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const CliConfig& c, int indent) {
  const RunConfig& r = c.run;
  json j;
  j["mode"] = std::string(to_string(r.mode));
  j["backend"] = std::string(to_string(c.backend));
  j["out"] = c.out.string();
  j["runs"] = c.runs;
  j["seeds"] = c.seeds;
  json modes = json::array();
  for (auto m : c.modes) modes.push_back(std::string(to_string(m)));
  j["modes"] = modes;
  j["population"] = r.population;
  j["generations"] = r.generations;
  j["full_epochs"] = r.full_epochs;
  j["partial_epochs"] = r.partial_epochs;
  j["surrogate_fraction"] = r.surrogate_fraction;
  j["seed"] = r.seed;
  j["genome"] = {{"registers", r.genome.registers},
                 {"min_length", r.genome.min_length},
                 {"max_length", r.genome.max_length}};
  j["variation"] = {{"p_mut_register", r.variation.p_mut_register},
                    {"p_mut_operand", r.variation.p_mut_operand},
                    {"p_mutation", r.variation.p_mutation},
                    {"p_crossover", r.variation.p_crossover},
                    {"tournament_size", r.variation.tournament_size},
                    {"elitism", r.variation.elitism}};
  j["repair"] = {{"max_flatten", r.max_flatten}, {"max_params", r.max_params}};
  j["data"] = {{"height", r.data.shape.height},   {"width", r.data.shape.width},
               {"channels", r.data.shape.channels}, {"classes", r.data.n_classes},
               {"base_count", r.data.base_count},  {"imbalance", r.data.imbalance},
               {"noise", r.data.noise},            {"min_scale", r.data.min_scale},
               {"max_scale", r.data.max_scale},    {"max_shift", r.data.max_shift},
               {"train", r.data.train},            {"validation", r.data.validation},
               {"test1", r.data.test1},            {"test2", r.data.test2},
               {"seed", r.data_seed},              {"smote_k", r.smote_k}};
  j["train"] = {{"batch_size", r.train.batch_size},
                {"learning_rate", r.train.learning_rate},
                {"momentum", r.train.momentum}};
  j["surrogate"] = {{"kernel", r.surrogate.kind == KernelKind::KPLS ? "kpls" : "kriging"},
                    {"h", r.surrogate.h},
                    {"log10_theta_min", r.surrogate.log10_theta_min},
                    {"log10_theta_max", r.surrogate.log10_theta_max},
                    {"nugget", r.surrogate.nugget},
                    {"nugget_max", r.surrogate.nugget_max},
                    {"restarts", r.surrogate.restarts},
                    {"max_evaluations", r.surrogate.max_evaluations}};
  j["proxy"] = {{"validation_rows", r.proxy_validation_rows}};
  return j.dump(indent);
}

std::string config_hash(const CliConfig& cfg) {
  CliConfig c = cfg;
  c.out.clear();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(config_to_json(c, -1))));
  return buf;
}

}  // namespace nlgp
