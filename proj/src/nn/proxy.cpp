#include "neurolgp/nn/proxy.hpp"

#include <algorithm>
#include <cmath>

#include "neurolgp/nn/shape.hpp"

namespace nlgp::nn {

double proxy_fitness(const ArchitectureDescriptor& arch) {
  const auto P = static_cast<double>(param_count(arch));
  const auto D = static_cast<double>(arch.layers.size());
  if (D == 0) return 0.0;
  const auto n_conv = static_cast<double>(
      std::count_if(arch.layers.begin(), arch.layers.end(), [](const LayerOp& l) { return l.kind == LayerKind::Conv; }));
  const double lp = std::log10(P);
  const double f = 0.35 + 0.30 * std::exp(-(D - 6.0) * (D - 6.0) / 8.0) + 0.20 * n_conv / D +
                   0.15 * std::exp(-(lp - 5.0) * (lp - 5.0) / 2.0);
  return std::clamp(f, 0.0, 1.0);
}

double proxy_learning_curve(int epochs, int full_epochs) {
  if (epochs <= 0) return 0.0;
  const double num = 1.0 - std::exp(-epochs / 6.0);
  const double den = 1.0 - std::exp(-std::max(full_epochs, 1) / 6.0);
  return std::min(1.0, num / den);
}

namespace {

std::uint64_t arch_hash(const ArchitectureDescriptor& arch) {
  return hash_string(describe(arch));
}

double jitter(std::uint64_t h, std::uint64_t i, std::uint64_t c) {
  // Uniform in [-1, 1).
  return static_cast<double>(derive_seed(h, {i, c}) >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace

EvalResult proxy_evaluate(const ArchitectureDescriptor& arch, int epochs, const ProxyConfig& cfg) {
  EvalResult r;
  r.fitness = proxy_fitness(arch) * proxy_learning_curve(epochs, cfg.full_epochs);
  r.epochs_trained = epochs;
  r.param_count = param_count(arch);
  r.cost_units = epochs;

  const auto C = static_cast<std::size_t>(cfg.n_classes);
  const auto h = arch_hash(arch);
  const double strength = 6.0 * (r.fitness - 1.0 / cfg.n_classes);
  r.phenotype.resize(static_cast<std::size_t>(cfg.n_validation) * C);
  std::vector<double> z(C);
  for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.n_validation); ++i) {
    const std::size_t label = i % C;
    // Per-row difficulty shared by every architecture, so phenotypes of
    // similar fitness stay close.
    const double difficulty = 0.5 * (jitter(0, i, 0) + 1.0);
    for (std::size_t c = 0; c < C; ++c)
      z[c] = (c == label ? strength * (1.0 - 0.5 * difficulty) : 0.0) + 0.3 * jitter(h, i, c);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) sum += (z[c] = std::exp(z[c] - zmax));
    for (std::size_t c = 0; c < C; ++c) r.phenotype[i * C + c] = z[c] / sum;
  }
  return r;
}

}  // namespace nlgp::nn
