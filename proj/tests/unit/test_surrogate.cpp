#include <gtest/gtest.h>

#include <Eigen/LU>
#include <cmath>

#include "neurolgp/errors.hpp"
#include "neurolgp/rng.hpp"
#include "neurolgp/surrogate.hpp"

using namespace nlgp;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

Archive random_archive(std::size_t n, std::size_t m, Rng& rng) {
  Archive a;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = random_vec(m, rng);
    double y = 0.0;
    for (std::size_t d = 0; d < m; ++d) y += std::sin(3.0 * x[d] + static_cast<double>(d));
    a.add(std::move(x), y);
  }
  return a;
}

// E[max(Y - f, 0)] for Y ~ N(mean, sigma^2) by composite Simpson over +-12 sigma.
double ei_quadrature(double mean, double sigma, double f_best) {
  const double lo = std::max(f_best, mean - 12.0 * sigma), hi = mean + 12.0 * sigma;
  if (hi <= lo) return 0.0;
  constexpr int kSteps = 20000;
  const double h = (hi - lo) / kSteps;
  double s = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double y = lo + i * h;
    const double w = (i == 0 || i == kSteps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double z = (y - mean) / sigma;
    s += w * (y - f_best) * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
  }
  return s * h / 3.0;
}

}  // namespace

TEST(Kernel, KrigingHandValues) {
  const std::vector<double> one{1.0}, zero{0.0}, theta1{1.0};
  EXPECT_DOUBLE_EQ(kriging_kernel(zero, zero, theta1), 1.0);
  EXPECT_NEAR(kriging_kernel(zero, one, theta1), 0.367879441171442, 1e-15);
  const std::vector<double> a{0.0, 0.0}, b{1.0, 1.0}, th{0.5, 0.5};
  EXPECT_NEAR(kriging_kernel(a, b, th), std::exp(-1.0), 1e-15);
  EXPECT_THROW(kriging_kernel(a, one, th), DimensionMismatch);
}

TEST(Kernel, KplsHandValues) {
  Eigen::MatrixXd W(2, 1);
  W << 1.0, 0.0;
  const std::vector<double> a{0.0, 0.0}, b{1.0, 0.0}, th{1.0};
  EXPECT_NEAR(kpls_kernel(a, b, th, W), std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(kpls_kernel(b, b, th, W), 1.0);
}

TEST(Kernel, KplsWithIdentityIsKriging) {
  Rng rng(1);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(6, 6);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_vec(6, rng, -2, 2), xp = random_vec(6, rng, -2, 2), th = random_vec(6, rng, 0.01, 3);
    EXPECT_NEAR(kpls_kernel(x, xp, th, I), kriging_kernel(x, xp, th), 1e-12);
  }
}

TEST(Pls, SingleInformativeColumn) {
  Rng rng(2);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(10, 4);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) y(i) = rng.normal();
  X.col(2) = y;
  const auto p = pls_directions(X, y, 1);
  ASSERT_EQ(p.W.cols(), 1);
  EXPECT_NEAR(std::abs(p.W(2, 0)), 1.0, 1e-12);
  EXPECT_NEAR(p.W.col(0).norm(), 1.0, 1e-12);
}

TEST(Pls, FirstDirectionMaximisesCovariance) {
  Rng rng(3);
  Eigen::MatrixXd X(20, 6);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 6; ++j) X(i, j) = rng.normal();
    y(i) = X(i, 0) - 0.5 * X(i, 3) + 0.3 * rng.normal();
  }
  const auto p = pls_directions(X, y, 1);
  const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  auto cov = [&](const Eigen::VectorXd& w) { return std::abs((Xc * w).dot(yc)); };
  const double best = cov(p.W.col(0));
  EXPECT_NEAR(p.W.col(0).norm(), 1.0, 1e-12);
  for (int t = 0; t < 10000; ++t) {
    Eigen::VectorXd w(6);
    for (int j = 0; j < 6; ++j) w(j) = rng.normal();
    w.normalize();
    ASSERT_LE(cov(w), best * (1 + 1e-12));
  }
}

TEST(Pls, ConstantResponseThrows) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(6, 3);
  EXPECT_THROW(pls_directions(X, Eigen::VectorXd::Constant(6, 2.0), 2), DegenerateResponse);
}

TEST(Archive, DeduplicatesKeepingLatest) {
  Archive a;
  a.add({0.1, 0.2}, 0.5);
  a.add({0.1, 0.2}, 0.5);
  EXPECT_EQ(a.size(), 1u);
  a.add({0.1, 0.2}, 0.7);
  EXPECT_EQ(a.size(), 1u);
  EXPECT_EQ(a.targets()[0], 0.7);
  a.add({0.3, 0.2}, 0.1);
  EXPECT_EQ(a.size(), 2u);
  EXPECT_THROW(a.add({0.3}, 0.1), DimensionMismatch);
}

TEST(Surrogate, InterpolatesArchivePoints) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Archive a = random_archive(5, 3, rng);
    SurrogateConfig cfg;
    cfg.kind = KernelKind::Kriging;
    const auto model = SurrogateModel::fit(a, cfg);
    const double s2 = model.params().process_variance;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto p = model.predict(a.inputs()[i]);
      EXPECT_NEAR(p.mean, a.targets()[i], 1e-6);
      EXPECT_LE(p.variance, 1e-8 * s2);
    }
  }
}

TEST(Surrogate, FarPointsRevertToTrend) {
  Rng rng(5);
  const Archive a = random_archive(8, 2, rng);
  const auto model = SurrogateModel::with_params(a, Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(5.0, 5.0));
  const auto p = model.predict(std::vector<double>{100.0, -100.0});
  EXPECT_NEAR(p.mean, model.trend(), 1e-12);
  EXPECT_NEAR(p.variance, model.params().process_variance * (1.0 + 1.0 / model.one_Rinv_one()), 1e-12);
}

TEST(Surrogate, MatchesDenseSolveOracle) {
  const std::vector<double> xs{0.0, 0.3, 0.45, 0.7, 1.0}, ys{0.2, 0.6, 0.5, 0.9, 0.4};
  Archive a;
  for (std::size_t i = 0; i < xs.size(); ++i) a.add({xs[i]}, ys[i]);
  const double theta = 4.0, nugget = 1e-10;
  const auto model = SurrogateModel::with_params(a, Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Constant(1, theta), nugget);

  const int n = 5;
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = std::exp(-theta * (xs[i] - xs[j]) * (xs[i] - xs[j])) + (i == j ? nugget : 0.0);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  const Eigen::VectorXd Ri1 = lu.solve(one), Riy = lu.solve(y);
  const double beta = one.dot(Riy) / one.dot(Ri1);
  const Eigen::VectorXd res = y - beta * one;
  const double s2 = res.dot(lu.solve(res)) / n;
  EXPECT_NEAR(model.trend(), beta, 1e-10);
  EXPECT_NEAR(model.params().process_variance, s2, 1e-10);
  for (double q : {-0.2, 0.15, 0.5, 0.85, 1.3}) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r(i) = std::exp(-theta * (q - xs[i]) * (q - xs[i]));
    const Eigen::VectorXd Rir = lu.solve(r);
    const double mean = beta + r.dot(lu.solve(res));
    const double u = 1.0 - one.dot(Rir);
    const double var = s2 * (1.0 - r.dot(Rir) + u * u / one.dot(Ri1));
    const auto p = model.predict(std::vector<double>{q});
    EXPECT_NEAR(p.mean, mean, 1e-10) << q;
    EXPECT_NEAR(p.variance, var, 1e-10) << q;
  }
}

TEST(Surrogate, FitNeverWorseThanItsStarts) {
  Rng rng(6);
  const Archive a = random_archive(25, 6, rng);
  const auto model = SurrogateModel::fit(a);
  ASSERT_FALSE(model.starts().empty());
  for (const auto& s : model.starts()) {
    const Eigen::VectorXd theta = s.unaryExpr([](double v) { return std::pow(10.0, v); });
    EXPECT_GE(model.log_likelihood(), model.log_likelihood_at(theta) - 1e-9);
  }
  const SurrogateConfig cfg;
  for (Eigen::Index k = 0; k < model.params().theta.size(); ++k) {
    EXPECT_GE(std::log10(model.params().theta(k)), cfg.log10_theta_min - 1e-12);
    EXPECT_LE(std::log10(model.params().theta(k)), cfg.log10_theta_max + 1e-12);
  }
  EXPECT_GT(model.params().nugget, 0.0);
  EXPECT_LE(model.h(), 3);
}

TEST(Surrogate, RefitBeatsGeneratingParameters) {
  // Sample y from a Gaussian process with known theta and refit.
  Rng rng(7);
  constexpr int n = 40, m = 3;
  const std::vector<double> theta_star{2.0, 0.5, 1.0};
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < n; ++i) xs.push_back(random_vec(m, rng));
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = kriging_kernel(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)], theta_star) + (i == j ? 1e-8 : 0.0);
  const Eigen::MatrixXd L = R.llt().matrixL();
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.normal();
  const Eigen::VectorXd y = (L * z).array() + 0.5;
  Archive a;
  for (int i = 0; i < n; ++i) a.add(xs[static_cast<std::size_t>(i)], y(i));

  SurrogateConfig kriging;
  kriging.kind = KernelKind::Kriging;
  const auto fitted = SurrogateModel::fit(a, kriging);
  const Eigen::VectorXd ts = Eigen::Map<const Eigen::VectorXd>(theta_star.data(), m);
  EXPECT_GE(fitted.log_likelihood(), fitted.log_likelihood_at(ts) - 1e-9);

  SurrogateConfig kpls;
  kpls.h = 2;
  const auto reduced = SurrogateModel::fit(a, kpls);
  EXPECT_EQ(reduced.h(), 2);
  EXPECT_GE(reduced.log_likelihood(), reduced.log_likelihood_at(Eigen::Vector2d(1.0, 1.0)) - 1e-9);
}

TEST(Surrogate, RejectsConstantTargets) {
  Archive a;
  a.add({0.0}, 1.0);
  a.add({1.0}, 1.0);
  a.add({2.0}, 1.0);
  EXPECT_THROW(SurrogateModel::fit(a), DegenerateResponse);
}

TEST(Surrogate, QueryDimensionChecked) {
  Rng rng(8);
  const auto model = SurrogateModel::fit(random_archive(6, 3, rng));
  EXPECT_THROW(model.predict(std::vector<double>{0.1, 0.2}), DimensionMismatch);
}

TEST(ExpectedImprovement, ClosedFormValues) {
  EXPECT_EQ(expected_improvement(0.3, 0.0, 0.5), 0.0);
  EXPECT_EQ(expected_improvement(0.5, 0.0, 0.5), 0.0);
  EXPECT_NEAR(expected_improvement(0.5, 1.0, 0.5), 0.398942280401433, 1e-12);
  EXPECT_NEAR(expected_improvement(1.5, 1.0, 0.5), 1.083315470, 1e-8);
}

TEST(ExpectedImprovement, MatchesQuadrature) {
  const double f_best = 0.4;
  for (int i = 0; i < 20; ++i) {
    const double z = -4.0 + 8.0 * i / 19.0;
    for (int j = 1; j <= 20; ++j) {
      const double sigma = 2.0 * j / 20.0;
      const double mean = f_best + z * sigma;
      EXPECT_NEAR(expected_improvement(mean, sigma * sigma, f_best), ei_quadrature(mean, sigma, f_best), 1e-6)
          << "z " << z << " sigma " << sigma;
    }
  }
}
