#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace nlgp {

/// K(x, x') = prod_i exp(-theta_i (x_i - x'_i)^2). Throws DimensionMismatch.
double kriging_kernel(std::span<const double> x, std::span<const double> xp,
                      std::span<const double> theta);

/// K(x, x') = prod_k prod_i exp(-theta_k (w_ik x_i - w_ik x'_i)^2) with W of
/// shape m x h. Throws DimensionMismatch.
double kpls_kernel(std::span<const double> x, std::span<const double> xp,
                   std::span<const double> theta, const Eigen::MatrixXd& W);

struct PLSProjection {
  Eigen::MatrixXd W;  ///< m x h rotated directions
  int h = 0;
};

/// PLS1 by NIPALS-style deflation on centred X and y; returns the rotated
/// directions W (P^T W)^-1. Fewer than `h` columns come back when the residual
/// covariance vanishes early. Throws DegenerateResponse if y is constant.
PLSProjection pls_directions(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int h);

struct KernelParams {
  Eigen::VectorXd theta;
  double process_variance = 0.0;
  double nugget = 1e-10;
};

/// Training pairs for the surrogate. Exact duplicate vectors are merged,
/// keeping the most recent target.
class Archive {
 public:
  void add(std::vector<double> x, double y);
  std::size_t size() const { return xs_.size(); }
  std::size_t dim() const { return xs_.empty() ? 0 : xs_.front().size(); }
  bool empty() const { return xs_.empty(); }
  const std::vector<std::vector<double>>& inputs() const { return xs_; }
  const std::vector<double>& targets() const { return ys_; }
  Eigen::MatrixXd X() const;
  Eigen::VectorXd y() const;

 private:
  std::vector<std::vector<double>> xs_;
  std::vector<double> ys_;
};

enum class KernelKind : std::uint8_t { Kriging, KPLS };

struct SurrogateConfig {
  KernelKind kind = KernelKind::KPLS;
  int h = 3;
  double log10_theta_min = -6.0;
  double log10_theta_max = 2.0;
  double nugget = 1e-10;
  double nugget_max = 1e-6;
  int restarts = 5;
  int max_evaluations = 300;  ///< likelihood evaluations per restart
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Ordinary Kriging (constant trend) through either the plain anisotropic
/// kernel or the KPLS kernel.
class SurrogateModel {
 public:
  /// Maximum-likelihood fit over log10(theta) by Nelder-Mead restarted from a
  /// log-uniform grid. Throws DegenerateResponse, SingularCorrelation, or
  /// DimensionMismatch.
  static SurrogateModel fit(const Archive& archive, const SurrogateConfig& cfg = SurrogateConfig{});

  /// Fits with fixed hyperparameters (no optimisation) for a given projection.
  static SurrogateModel with_params(const Archive& archive, const Eigen::MatrixXd& W,
                                    const Eigen::VectorXd& theta, double nugget = 1e-10);

  /// Variance at or below twice the nugget share of sigma^2 is reported as 0.
  Prediction predict(std::span<const double> x) const;

  /// Concentrated log-likelihood -n/2 log(sigma^2) - 1/2 log|R| for `theta`
  /// under this model's projection; -inf if R cannot be factorised.
  double log_likelihood_at(const Eigen::VectorXd& theta) const;

  const Eigen::MatrixXd& directions() const { return W_; }
  const KernelParams& params() const { return params_; }
  double trend() const { return beta_; }
  double log_likelihood() const { return log_likelihood_; }
  std::size_t n() const { return static_cast<std::size_t>(X_.rows()); }
  int h() const { return static_cast<int>(W_.cols()); }
  /// log10(theta) starting points used by fit, one per restart.
  const std::vector<Eigen::VectorXd>& starts() const { return starts_; }

  /// 1^T R^-1 1 of the fitted correlation matrix.
  double one_Rinv_one() const { return one_Rinv_one_; }

 private:
  void prepare_distances();
  Eigen::MatrixXd correlation(const Eigen::VectorXd& theta) const;
  bool factorise(const Eigen::VectorXd& theta, double nugget);

  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd W_;
  Eigen::MatrixXd W2_;                 ///< elementwise square of W_
  std::vector<Eigen::MatrixXd> dist_;  ///< per-component weighted squared distances
  KernelParams params_;
  double nugget_max_ = 1e-6;
  double beta_ = 0.0;
  double log_likelihood_ = 0.0;
  double one_Rinv_one_ = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;  ///< R^-1 (y - 1 beta)
  std::vector<Eigen::VectorXd> starts_;
};

/// Maximisation form: (mean - f_best) Phi(z) + sigma phi(z), z = (mean - f_best)/sigma.
double expected_improvement(double mean, double variance, double f_best);

double normal_pdf(double z);
double normal_cdf(double z);

}  // namespace nlgp
