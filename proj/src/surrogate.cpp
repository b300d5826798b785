#include "neurolgp/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "neurolgp/errors.hpp"

namespace nlgp {

double kriging_kernel(std::span<const double> x, std::span<const double> xp,
                      std::span<const double> theta) {
  if (x.size() != xp.size() || x.size() != theta.size())
    throw DimensionMismatch("kriging kernel: inputs and theta must share dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - xp[i];
    s += theta[i] * d * d;
  }
  return std::exp(-s);
}

double kpls_kernel(std::span<const double> x, std::span<const double> xp,
                   std::span<const double> theta, const Eigen::MatrixXd& W) {
  if (x.size() != xp.size() || static_cast<Eigen::Index>(x.size()) != W.rows() ||
      static_cast<Eigen::Index>(theta.size()) != W.cols())
    throw DimensionMismatch("kpls kernel: expected x in R^m, W m x h, theta in R^h");
  double s = 0.0;
  for (Eigen::Index k = 0; k < W.cols(); ++k) {
    double sk = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = W(static_cast<Eigen::Index>(i), k) * x[i] -
                       W(static_cast<Eigen::Index>(i), k) * xp[i];
      sk += d * d;
    }
    s += theta[static_cast<std::size_t>(k)] * sk;
  }
  return std::exp(-s);
}

PLSProjection pls_directions(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int h) {
  if (X.rows() != y.size()) throw DimensionMismatch("pls: X rows must match y");
  if (X.rows() < 2) throw DimensionMismatch("pls: need at least 2 samples");
  if (h < 1) throw std::invalid_argument("pls: h must be >= 1");

  Eigen::MatrixXd Xk = X.rowwise() - X.colwise().mean();
  Eigen::VectorXd yk = y.array() - y.mean();
  const double y_scale = yk.norm();
  if (y_scale <= 1e-14 * std::max(1.0, y.cwiseAbs().maxCoeff()))
    throw DegenerateResponse("pls: response is constant");

  const Eigen::Index m = X.cols();
  Eigen::MatrixXd W(m, h), P(m, h);
  int found = 0;
  const double x_scale = std::max(Xk.norm(), 1e-300);
  for (int k = 0; k < h; ++k) {
    Eigen::VectorXd w = Xk.transpose() * yk;
    const double wn = w.norm();
    if (wn <= 1e-12 * x_scale * y_scale) break;
    w /= wn;
    const Eigen::VectorXd t = Xk * w;
    const double tt = t.squaredNorm();
    if (tt <= 1e-300) break;
    const Eigen::VectorXd p = Xk.transpose() * t / tt;
    const double c = yk.dot(t) / tt;
    Xk.noalias() -= t * p.transpose();
    yk -= c * t;
    W.col(k) = w;
    P.col(k) = p;
    ++found;
  }
  if (found == 0) throw DegenerateResponse("pls: no covariance between X and y");
  W.conservativeResize(m, found);
  P.conservativeResize(m, found);
  const Eigen::MatrixXd PtW = P.transpose() * W;
  PLSProjection proj;
  proj.W = W * PtW.partialPivLu().inverse();
  proj.h = found;
  return proj;
}

void Archive::add(std::vector<double> x, double y) {
  if (!xs_.empty() && x.size() != xs_.front().size())
    throw DimensionMismatch("archive: phenotype dimension changed");
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (xs_[i] == x) {
      ys_[i] = y;
      return;
    }
  }
  xs_.push_back(std::move(x));
  ys_.push_back(y);
}

Eigen::MatrixXd Archive::X() const {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < xs_.size(); ++i)
    for (std::size_t j = 0; j < xs_[i].size(); ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xs_[i][j];
  return X;
}

Eigen::VectorXd Archive::y() const {
  return Eigen::Map<const Eigen::VectorXd>(ys_.data(), static_cast<Eigen::Index>(ys_.size()));
}

void SurrogateModel::prepare_distances() {
  W2_ = W_.cwiseAbs2();
  const Eigen::Index n = X_.rows();
  dist_.assign(static_cast<std::size_t>(W_.cols()), Eigen::MatrixXd::Zero(n, n));
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const Eigen::VectorXd d2 = (X_.row(a) - X_.row(b)).transpose().cwiseAbs2();
      const Eigen::VectorXd per_k = W2_.transpose() * d2;
      for (Eigen::Index k = 0; k < W_.cols(); ++k) {
        dist_[static_cast<std::size_t>(k)](a, b) = per_k(k);
        dist_[static_cast<std::size_t>(k)](b, a) = per_k(k);
      }
    }
  }
}

Eigen::MatrixXd SurrogateModel::correlation(const Eigen::VectorXd& theta) const {
  const Eigen::Index n = X_.rows();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < dist_.size(); ++k)
    S.noalias() += theta(static_cast<Eigen::Index>(k)) * dist_[k];
  return (-S).array().exp().matrix();
}

namespace {

struct LikelihoodTerms {
  double log_likelihood = -std::numeric_limits<double>::infinity();
  double beta = 0.0;
  double sigma2 = 0.0;
  double nugget = 0.0;
  double one_Rinv_one = 0.0;
};

bool concentrated_likelihood(const Eigen::MatrixXd& R0, const Eigen::VectorXd& y, double nugget,
                             double nugget_max, Eigen::LLT<Eigen::MatrixXd>& llt,
                             LikelihoodTerms& out, Eigen::VectorXd* alpha) {
  const Eigen::Index n = R0.rows();
  for (double nug = nugget; nug <= nugget_max * (1 + 1e-9); nug *= 10.0) {
    Eigen::MatrixXd R = R0;
    R.diagonal().array() += nug;
    llt.compute(R);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::VectorXd Rinv1 = llt.solve(Eigen::VectorXd::Ones(n));
    const Eigen::VectorXd Rinvy = llt.solve(y);
    const double one_Rinv_one = Rinv1.sum();
    if (!(one_Rinv_one > 0.0) || !std::isfinite(one_Rinv_one)) continue;
    const double beta = Rinvy.sum() / one_Rinv_one;
    const Eigen::VectorXd a = Rinvy - beta * Rinv1;
    const Eigen::VectorXd resid = y.array() - beta;
    const double sigma2 = resid.dot(a) / static_cast<double>(n);
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) continue;
    const auto L = llt.matrixLLT();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(L(i, i));
    out.log_likelihood = -0.5 * static_cast<double>(n) * std::log(sigma2) - 0.5 * log_det;
    out.beta = beta;
    out.sigma2 = sigma2;
    out.nugget = nug;
    out.one_Rinv_one = one_Rinv_one;
    if (alpha) *alpha = a;
    return true;
  }
  return false;
}

// Nelder-Mead minimisation; the best vertex never gets worse than the start.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& start, double step, int max_evals) {
  const Eigen::Index d = start.size();
  std::vector<Eigen::VectorXd> pts{start};
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd p = start;
    p(i) += step;
    pts.push_back(p);
  }
  std::vector<double> vals;
  for (const auto& p : pts) vals.push_back(f(p));
  int evals = static_cast<int>(pts.size());
  std::vector<std::size_t> order(pts.size());

  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(),
                      second = order[order.size() - 2];
    if (std::abs(vals[worst] - vals[best]) <= 1e-10 * (1.0 + std::abs(vals[best]))) {
      double spread = 0.0;
      for (const auto& p : pts) spread = std::max(spread, (p - pts[best]).cwiseAbs().maxCoeff());
      if (spread < 1e-6) break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i : order)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(d);

    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    ++evals;
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = f(xc);
    ++evals;
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = f(pts[i]);
      ++evals;
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  return pts[static_cast<std::size_t>(it - vals.begin())];
}

}  // namespace

bool SurrogateModel::factorise(const Eigen::VectorXd& theta, double nugget) {
  LikelihoodTerms terms;
  if (!concentrated_likelihood(correlation(theta), y_, nugget, nugget_max_, llt_, terms, &alpha_))
    return false;
  params_.theta = theta;
  params_.process_variance = terms.sigma2;
  params_.nugget = terms.nugget;
  beta_ = terms.beta;
  log_likelihood_ = terms.log_likelihood;
  one_Rinv_one_ = terms.one_Rinv_one;
  return true;
}

double SurrogateModel::log_likelihood_at(const Eigen::VectorXd& theta) const {
  Eigen::LLT<Eigen::MatrixXd> llt;
  LikelihoodTerms terms;
  concentrated_likelihood(correlation(theta), y_, params_.nugget, nugget_max_, llt, terms,
                          nullptr);
  return terms.log_likelihood;
}

SurrogateModel SurrogateModel::fit(const Archive& archive, const SurrogateConfig& cfg) {
  if (archive.size() < 2) throw DegenerateResponse("surrogate: need at least 2 archive points");
  SurrogateModel model;
  model.X_ = archive.X();
  model.y_ = archive.y();
  model.nugget_max_ = cfg.nugget_max;
  model.params_.nugget = cfg.nugget;
  const auto n = static_cast<int>(model.X_.rows());
  const auto m = static_cast<int>(model.X_.cols());

  if (cfg.kind == KernelKind::KPLS) {
    const int h = std::max(1, std::min({cfg.h, m, n - 1}));
    model.W_ = pls_directions(model.X_, model.y_, h).W;
  } else {
    if ((model.y_.array() == model.y_(0)).all())
      throw DegenerateResponse("surrogate: response is constant");
    model.W_ = Eigen::MatrixXd::Identity(m, m);
  }
  model.prepare_distances();

  const Eigen::Index d = model.W_.cols();
  const double lo = cfg.log10_theta_min, hi = cfg.log10_theta_max;
  auto to_theta = [&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(v.cwiseMax(lo).cwiseMin(hi).unaryExpr(
        [](double e) { return std::pow(10.0, e); }));
  };
  Eigen::LLT<Eigen::MatrixXd> scratch;
  auto objective = [&](const Eigen::VectorXd& v) {
    LikelihoodTerms t;
    if (!concentrated_likelihood(model.correlation(to_theta(v)), model.y_, cfg.nugget,
                                 cfg.nugget_max, scratch, t, nullptr))
      return std::numeric_limits<double>::infinity();
    return -t.log_likelihood;
  };

  Eigen::VectorXd best_v;
  double best_f = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    const double g = lo + (r + 0.5) * (hi - lo) / cfg.restarts;
    const Eigen::VectorXd start = Eigen::VectorXd::Constant(d, g);
    model.starts_.push_back(start);
    const Eigen::VectorXd v = nelder_mead(objective, start, 0.5 * (hi - lo) / cfg.restarts,
                                          cfg.max_evaluations * static_cast<int>(std::max<Eigen::Index>(1, d)));
    const double fv = objective(v);
    if (fv < best_f) {
      best_f = fv;
      best_v = v.cwiseMax(lo).cwiseMin(hi);
    }
  }
  if (!std::isfinite(best_f) || !model.factorise(to_theta(best_v), cfg.nugget))
    throw SingularCorrelation("surrogate: correlation matrix not positive definite at maximum nugget");
  return model;
}

SurrogateModel SurrogateModel::with_params(const Archive& archive, const Eigen::MatrixXd& W,
                                           const Eigen::VectorXd& theta, double nugget) {
  if (W.rows() != static_cast<Eigen::Index>(archive.dim()) || W.cols() != theta.size())
    throw DimensionMismatch("surrogate: W must be m x h and theta length h");
  SurrogateModel model;
  model.X_ = archive.X();
  model.y_ = archive.y();
  model.W_ = W;
  model.nugget_max_ = std::max(nugget, model.nugget_max_);
  model.params_.nugget = nugget;
  model.prepare_distances();
  if (!model.factorise(theta, nugget))
    throw SingularCorrelation("surrogate: correlation matrix not positive definite");
  return model;
}

Prediction SurrogateModel::predict(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != X_.cols())
    throw DimensionMismatch("surrogate: query dimension differs from archive");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::Index n = X_.rows();
  Eigen::VectorXd r(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::VectorXd d2 = (X_.row(j).transpose() - xv).cwiseAbs2();
    r(j) = std::exp(-params_.theta.dot(W2_.transpose() * d2));
  }
  Prediction p;
  p.mean = beta_ + r.dot(alpha_);
  const Eigen::VectorXd v = llt_.solve(r);
  const double u = 1.0 - v.sum();
  p.variance = params_.process_variance * (1.0 - r.dot(v) + u * u / one_Rinv_one_);
  // The nugget leaves at most nugget * sigma^2 of variance at archive points;
  // anything below twice that is regularisation noise, not uncertainty.
  if (p.variance <= 2.0 * params_.nugget * params_.process_variance) p.variance = 0.0;
  return p;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double expected_improvement(double mean, double variance, double f_best) {
  const double gain = mean - f_best;
  if (!(variance > 0.0)) return std::max(gain, 0.0);
  const double sigma = std::sqrt(variance);
  const double z = gain / sigma;
  return std::max(0.0, gain * normal_cdf(z) + sigma * normal_pdf(z));
}

}  // namespace nlgp
