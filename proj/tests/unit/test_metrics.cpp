#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "neurolgp/errors.hpp"
#include "neurolgp/metrics.hpp"
#include "neurolgp/rng.hpp"

using namespace nlgp;

namespace {

using V = std::vector<double>;

double brute_tau(const V& a, const V& b) {
  const std::size_t n = a.size();
  long long s = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double x = (a[i] - a[j]) * (b[i] - b[j]);
      s += x > 0 ? 1 : (x < 0 ? -1 : 0);
    }
  return static_cast<double>(s) / (static_cast<double>(n) * (n - 1) / 2.0);
}

}  // namespace

TEST(Mse, Values) {
  EXPECT_EQ(mse(V{0.2, 0.4}, V{0.2, 0.4}), 0.0);
  EXPECT_NEAR(mse(V{0.7, 0.9}, V{0.8, 0.9}), 0.005, 1e-15);
  EXPECT_THROW(mse(V{1.0}, V{1.0, 2.0}), LengthMismatch);
}

TEST(KendallTau, Values) {
  EXPECT_EQ(kendall_tau(V{1, 2, 3, 4}, V{1, 2, 3, 4}), 1.0);
  EXPECT_EQ(kendall_tau(V{1, 2, 3, 4}, V{4, 3, 2, 1}), -1.0);
  EXPECT_EQ(kendall_tau(V{1, 2, 3, 4}, V{1, 3, 2, 4}), 4.0 / 6.0);
}

TEST(KendallTau, MatchesBruteForce) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.index(199);
    V a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse values so that ties occur.
      a[i] = static_cast<double>(rng.index(20));
      b[i] = a[i] + static_cast<double>(rng.index(15));
    }
    EXPECT_EQ(kendall_tau(a, b), brute_tau(a, b)) << n;
  }
}

TEST(RSquared, Values) {
  EXPECT_EQ(r_squared(V{1, 2, 3}, V{1, 2, 3}), 1.0);
  EXPECT_EQ(r_squared(V{2, 2, 2}, V{1, 2, 3}), 0.0);
  EXPECT_EQ(r_squared(V{1, 2, 4}, V{1, 2, 3}), 0.5);
  EXPECT_THROW(r_squared(V{1, 2}, V{3, 3}), ConstantActual);
}

TEST(Metrics, MatchDefinitions) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.index(199);
    V p(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform();
      p[i] = a[i] + 0.1 * rng.normal();
    }
    double ss = 0.0, mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n), tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ss += (p[i] - a[i]) * (p[i] - a[i]);
      tot += (a[i] - mean) * (a[i] - mean);
    }
    EXPECT_NEAR(mse(p, a), ss / static_cast<double>(n), 1e-12);
    EXPECT_NEAR(r_squared(p, a), 1.0 - ss / tot, 1e-12);
    const double tau = kendall_tau(p, a);
    EXPECT_GE(tau, -1.0);
    EXPECT_LE(tau, 1.0);
    EXPECT_LE(r_squared(p, a), 1.0);
  }
}

TEST(FitReport, FlagsUnavailableFields) {
  const auto one = fit_report(V{0.5}, V{0.4});
  EXPECT_EQ(one.n_pairs, 1u);
  EXPECT_TRUE(std::isnan(one.kendall_tau));
  EXPECT_TRUE(std::isnan(one.r_squared));
  EXPECT_NEAR(one.mse, 0.01, 1e-15);
  const auto flat = fit_report(V{0.1, 0.2}, V{0.3, 0.3});
  EXPECT_TRUE(std::isnan(flat.r_squared));
  EXPECT_FALSE(std::isnan(flat.kendall_tau));
  const auto ok = fit_report(V{1, 2, 4}, V{1, 2, 3});
  EXPECT_EQ(ok.r_squared, 0.5);
  EXPECT_EQ(ok.kendall_tau, 1.0);
}

TEST(CostReduction, Values) {
  EXPECT_NEAR(cost_reduction(22500, 16900), 24.888888888888889, 1e-12);
  EXPECT_EQ(cost_reduction(22500, 22500), 0.0);
}
