#include "neurolgp/metrics.hpp"

#include <cmath>
#include <limits>

#include "neurolgp/errors.hpp"

namespace nlgp {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b, std::size_t min_n) {
  if (a.size() != b.size())
    throw LengthMismatch("length mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  if (a.size() < min_n)
    throw LengthMismatch("need at least " + std::to_string(min_n) + " pairs");
}

int sign(double x) { return (x > 0) - (x < 0); }

}  // namespace

double mse(std::span<const double> predicted, std::span<const double> actual) {
  check_lengths(predicted, actual, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = predicted[i] - actual[i];
    s += d * d;
  }
  return s / static_cast<double>(actual.size());
}

double kendall_tau(std::span<const double> predicted, std::span<const double> actual) {
  check_lengths(predicted, actual, 2);
  const std::size_t n = actual.size();
  long long net = 0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      net += sign(predicted[i] - predicted[j]) * sign(actual[i] - actual[j]);
  return static_cast<double>(net) / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double r_squared(std::span<const double> predicted, std::span<const double> actual) {
  check_lengths(predicted, actual, 1);
  double mean = 0.0;
  for (double a : actual) mean += a;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  if (ss_tot == 0.0) throw ConstantActual("R^2 undefined for constant actual values");
  return 1.0 - ss_res / ss_tot;
}

FitReport fit_report(std::span<const double> predicted, std::span<const double> actual) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  FitReport r{nan, nan, nan, actual.size()};
  if (actual.empty() || predicted.size() != actual.size()) return r;
  r.mse = mse(predicted, actual);
  if (actual.size() >= 2) r.kendall_tau = kendall_tau(predicted, actual);
  try {
    r.r_squared = r_squared(predicted, actual);
  } catch (const ConstantActual&) {
  }
  return r;
}

double cost_reduction(double expensive_cost, double surrogate_cost) {
  if (expensive_cost <= 0.0) throw std::invalid_argument("expensive cost must be positive");
  return 100.0 * (1.0 - surrogate_cost / expensive_cost);
}

}  // namespace nlgp
