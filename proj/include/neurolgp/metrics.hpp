#pragma once

#include <cstddef>
#include <span>

namespace nlgp {

/// Quality of fit of predicted against realized fitness.
struct FitReport {
  double mse = 0.0;
  double kendall_tau = 0.0;
  double r_squared = 0.0;
  std::size_t n_pairs = 0;
};

double mse(std::span<const double> predicted, std::span<const double> actual);

/// Tau-a: (concordant - discordant) / (n(n-1)/2). Pairs tied in either argument
/// count as neither.
double kendall_tau(std::span<const double> predicted, std::span<const double> actual);

/// 1 - SS_res / SS_tot about the mean of `actual`. Throws ConstantActual.
double r_squared(std::span<const double> predicted, std::span<const double> actual);

/// Fields whose preconditions fail (n < 2, constant actual) are NaN.
FitReport fit_report(std::span<const double> predicted, std::span<const double> actual);

/// Percentage of evaluation cost saved: 100 * (1 - surrogate / expensive).
double cost_reduction(double expensive_cost, double surrogate_cost);

}  // namespace nlgp
