#pragma once

#include "neurolgp/architecture.hpp"
#include "neurolgp/nn/trainer.hpp"

namespace nlgp::nn {

/// Training-free stand-in for accuracy, used by tests and fast runs.
///   0.35 + 0.30 exp(-(D - 6)^2 / 8) + 0.20 n_conv / D
///        + 0.15 exp(-(log10 P - 5)^2 / 2)
/// with D the genome-layer depth, n_conv the Conv count and P the parameter
/// count including the head. Peaks for six layers, mostly convolutional,
/// around 1e5 parameters. Throws ShapeExhausted like param_count.
double proxy_fitness(const ArchitectureDescriptor& arch);

/// Fraction of the final quality reached after `epochs` of `full_epochs`:
/// (1 - exp(-e / 6)) / (1 - exp(-full / 6)), capped at 1.
double proxy_learning_curve(int epochs, int full_epochs);

struct ProxyConfig {
  int n_validation = 60;  ///< rows in the synthetic phenotype
  int n_classes = 3;
  int full_epochs = 30;
};

/// EvalResult with fitness proxy_fitness * learning curve and a phenotype of
/// softmax rows whose confidence in the true class (label = row mod classes)
/// grows with that fitness, perturbed by a per-architecture deterministic
/// jitter.
EvalResult proxy_evaluate(const ArchitectureDescriptor& arch, int epochs, const ProxyConfig& cfg);

}  // namespace nlgp::nn
