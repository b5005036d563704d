#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "jurysim/random.hpp"

namespace jurysim {

// Design matrix for cluster labeling: per-round cluster mean votes as
// predictors of the round's ground-truth quality.
struct ClusterDesign {
  Eigen::MatrixXd mean_votes;         // rounds x clusters
  std::vector<std::int8_t> response;  // per-round p1, +/-1
};

// Held-out metric scored by cross-validation when selecting lambda.
//
// class_error is the default because of how the fit is consumed: clusters
// are labeled by their zero pattern, so selection must stay sparse.  On
// near-separable designs (an honest cluster's mean vote predicts quality
// almost perfectly) held-out deviance keeps falling along the whole path,
// so a one-SE rule never retreats and redundant or anti-correlated clusters
// ride in at the path floor.  Misclassification error instead bottoms out
// as soon as the dominant cluster classifies every round, and the first
// index attaining the minimum is the sparsest such model.
enum class CvMetric { class_error, deviance };

struct LassoOptions {
  int path_size = 100;
  double lambda_min_ratio = 1e-4;
  int folds = 5;
  CvMetric cv_metric = CvMetric::class_error;
  double prob_clamp = 1e-5;
  double tol = 1e-8;   // coordinate-descent convergence, on coefficient moves
  int max_irls = 50;
  int max_sweeps = 1000;
  // Early path stopping, as in glmnet's factory settings: the lambda
  // sequence ends once the full-data fit explains more than max_dev_ratio of
  // the null deviance, or once a step improves the explained ratio by less
  // than min_dev_change times its current value.  Cross-validation scores
  // only the lambdas actually fitted, so a dominant predictor keeps
  // selection in the sparse regime instead of dragging it to the path floor,
  // where a near-saturated fit would let weak columns back in.
  double max_dev_ratio = 0.999;
  double min_dev_change = 1e-5;
};

// L1-regularized logistic fit at the cross-validated lambda.  Coefficients
// are reported on the original predictor scale; exact zeros survive the
// unstandardization untouched, which is what downstream labeling keys on.
struct LassoFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  double lambda = 0.0;
  Eigen::VectorXd lambda_path;
  Eigen::VectorXd cv_mean;  // mean held-out CV metric per lambda (see CvMetric)
  Eigen::VectorXd cv_se;    // its standard error across folds
  int index_min = -1;       // path index minimizing cv_mean
  int index_1se = -1;       // chosen index: largest lambda within one SE of the min
};

namespace detail {

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// One penalized logistic solve at a fixed lambda: outer IRLS
// requadratization, inner soft-threshold sweeps.  b0/beta double as the warm
// start and the result, so calling this down a descending lambda sequence
// reproduces a warm-started path.
inline void logistic_irls(const Eigen::Ref<const Eigen::MatrixXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y01,
                          const std::vector<int>& active, double lambda,
                          const LassoOptions& opts, double& b0, Eigen::VectorXd& beta) {
  const auto n = x.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double lo = opts.prob_clamp, hi = 1.0 - opts.prob_clamp;

  Eigen::VectorXd eta(n), prob(n), w(n), z(n), resid(n);
  for (int outer = 0; outer < opts.max_irls; ++outer) {
    eta = (x * beta).array() + b0;
    prob = (1.0 / (1.0 + (-eta.array()).exp())).cwiseMax(lo).cwiseMin(hi);
    w = prob.array() * (1.0 - prob.array());
    z = eta.array() + (y01.array() - prob.array()) / w.array();

    // Weighted least squares on (z, x) by cyclic coordinate descent.
    resid = z.array() - eta.array();
    double outer_move = 0.0;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
      double move = 0.0;
      for (int j : active) {
        const double bj = beta(j);
        const double rho = inv_n * (w.array() * x.col(j).array() *
                                    (resid.array() + x.col(j).array() * bj))
                                       .sum();
        const double denom = inv_n * (w.array() * x.col(j).array().square()).sum();
        double bj_new = 0.0;
        if (denom > 0.0) bj_new = soft_threshold(rho, lambda) / denom;
        if (bj_new != bj) {
          resid.array() += x.col(j).array() * (bj - bj_new);
          beta(j) = bj_new;
          move = std::max(move, std::abs(bj_new - bj));
        }
      }
      const double shift = (w.array() * resid.array()).sum() / w.sum();
      if (shift != 0.0) {
        b0 += shift;
        resid.array() -= shift;
        move = std::max(move, std::abs(shift));
      }
      outer_move = std::max(outer_move, move);
      if (move < opts.tol) break;
    }
    // Converged only when a freshly built quadratic no longer moves any
    // coefficient: then (w, z) are self-consistent with beta and the
    // penalized score equations hold for the logistic objective itself.
    if (outer_move < opts.tol) break;
  }
}

// Coordinate-descent path for penalized logistic regression on standardized
// predictors, warm-started along a descending lambda sequence.  Returns one
// column of coefficients per lambda, intercept in row 0.
inline Eigen::MatrixXd logistic_path(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                     const Eigen::Ref<const Eigen::VectorXd>& y01,
                                     const std::vector<int>& active,
                                     const Eigen::Ref<const Eigen::VectorXd>& lambdas,
                                     const LassoOptions& opts) {
  const auto p = x.cols();
  const double lo = opts.prob_clamp, hi = 1.0 - opts.prob_clamp;
  const double ybar = std::clamp(y01.mean(), lo, hi);
  double b0 = std::log(ybar / (1.0 - ybar));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);

  Eigen::MatrixXd out(p + 1, lambdas.size());
  for (Eigen::Index l = 0; l < lambdas.size(); ++l) {
    logistic_irls(x, y01, active, lambdas(l), opts, b0, beta);
    out(0, l) = b0;
    out.col(l).tail(p) = beta;
  }
  return out;
}

inline double binomial_deviance(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& y01, double b0,
                                const Eigen::Ref<const Eigen::VectorXd>& beta,
                                double clamp) {
  Eigen::ArrayXd eta = (x * beta).array() + b0;
  Eigen::ArrayXd prob = (1.0 / (1.0 + (-eta).exp())).cwiseMax(clamp).cwiseMin(1.0 - clamp);
  const double ll =
      (y01.array() * prob.log() + (1.0 - y01.array()) * (1.0 - prob).log()).mean();
  return -2.0 * ll;
}

// Fraction of rounds misclassified by the 0.5-threshold rule (eta > 0).
inline double classification_error(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& y01, double b0,
                                   const Eigen::Ref<const Eigen::VectorXd>& beta) {
  Eigen::ArrayXd eta = (x * beta).array() + b0;
  return ((eta > 0.0).cast<double>() - y01.array()).abs().mean();
}

}  // namespace detail

// Lasso logistic regression of round quality on cluster mean votes.
//
// Predictors are standardized (population sd); the intercept is unpenalized.
// The lambda path is geometric from the smallest lambda that zeroes every
// coefficient down by lambda_min_ratio, truncated where the full-data fit
// saturates (see LassoOptions); the reported fit uses the one-SE rule over
// folds-fold cross-validated binomial deviance.  Rounds where a cluster
// never varies contribute an exact zero coefficient, as do constant
// responses (intercept-only fit).
inline LassoFit lasso_logistic(const ClusterDesign& design, const RandomStream& rng,
                               const LassoOptions& opts = {}) {
  const auto n = design.mean_votes.rows();
  const auto p = design.mean_votes.cols();
  if (n < 2) throw std::invalid_argument("lasso_logistic: need at least 2 rounds");
  if (static_cast<Eigen::Index>(design.response.size()) != n) {
    throw std::invalid_argument("lasso_logistic: response length mismatch");
  }
  if (opts.folds < 2 || opts.folds > n) {
    throw std::invalid_argument("lasso_logistic: need 2 <= folds <= rounds");
  }

  Eigen::VectorXd y01(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto v = design.response[static_cast<std::size_t>(i)];
    if (v != 1 && v != -1) throw std::invalid_argument("lasso_logistic: response must be +/-1");
    y01(i) = v == 1 ? 1.0 : 0.0;
  }

  LassoFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(p);

  // Standardize on the full data; zero-variance columns are frozen out.
  Eigen::RowVectorXd mu = design.mean_votes.colwise().mean();
  Eigen::MatrixXd xs = design.mean_votes.rowwise() - mu;
  Eigen::VectorXd sd = (xs.array().square().colwise().mean()).sqrt();
  std::vector<int> active;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (sd(j) > 0.0) {
      xs.col(j) /= sd(j);
      active.push_back(static_cast<int>(j));
    } else {
      xs.col(j).setZero();
    }
  }

  const double ybar = y01.mean();
  const double lo = opts.prob_clamp;
  if (ybar <= 0.0 || ybar >= 1.0 || active.empty()) {
    // Constant response or no usable predictor: intercept-only fit.
    const double yc = std::clamp(ybar, lo, 1.0 - lo);
    fit.intercept = std::log(yc / (1.0 - yc));
    return fit;
  }

  double lambda_max = 0.0;
  for (int j : active) {
    lambda_max = std::max(lambda_max,
                          std::abs((xs.col(j).array() * (y01.array() - ybar)).sum()) /
                              static_cast<double>(n));
  }

  const int grid = std::max(2, opts.path_size);
  fit.lambda_path.resize(grid);
  const double ratio = std::pow(opts.lambda_min_ratio, 1.0 / (grid - 1));
  double lam = lambda_max;
  for (int l = 0; l < grid; ++l, lam *= ratio) fit.lambda_path(l) = lam;

  // Fit the path on the full data first.  It yields the reported
  // coefficients and decides how far the lambda sequence usefully extends:
  // once the fit saturates (max_dev_ratio / min_dev_change), later lambdas
  // only relax the penalty on columns the data cannot distinguish, so they
  // are dropped before cross-validation ever scores them.
  Eigen::MatrixXd full_coefs(p + 1, grid);
  int path = 0;
  {
    double b0w = std::log(ybar / (1.0 - ybar));
    Eigen::VectorXd betaw = Eigen::VectorXd::Zero(p);
    const double null_dev = detail::binomial_deviance(xs, y01, b0w, betaw, lo);
    double prev_ratio = 0.0;
    for (int l = 0; l < grid; ++l) {
      detail::logistic_irls(xs, y01, active, fit.lambda_path(l), opts, b0w, betaw);
      full_coefs(0, l) = b0w;
      full_coefs.col(l).tail(p) = betaw;
      ++path;
      const double dev_ratio =
          1.0 - detail::binomial_deviance(xs, y01, b0w, betaw, lo) / null_dev;
      if (dev_ratio > opts.max_dev_ratio) break;
      if (l > 0 && dev_ratio - prev_ratio < opts.min_dev_change * dev_ratio) break;
      prev_ratio = dev_ratio;
    }
  }
  if (path < grid) fit.lambda_path.conservativeResize(path);

  // Cross-validation over a shuffled round-robin fold split.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  RandomStream shuffle_rng = rng.child(0x6376ULL);  // "cv"
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(shuffle_rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        static_cast<int>(i) % opts.folds;
  }

  Eigen::MatrixXd fold_dev(opts.folds, path);
  for (int f = 0; f < opts.folds; ++f) {
    std::vector<int> train, test;
    for (Eigen::Index i = 0; i < n; ++i) {
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(static_cast<int>(i));
    }
    Eigen::MatrixXd xtr(train.size(), p), xte(test.size(), p);
    Eigen::VectorXd ytr(train.size()), yte(test.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      xtr.row(static_cast<Eigen::Index>(i)) = xs.row(train[i]);
      ytr(static_cast<Eigen::Index>(i)) = y01(train[i]);
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      xte.row(static_cast<Eigen::Index>(i)) = xs.row(test[i]);
      yte(static_cast<Eigen::Index>(i)) = y01(test[i]);
    }
    const Eigen::MatrixXd coefs = detail::logistic_path(xtr, ytr, active, fit.lambda_path, opts);
    for (int l = 0; l < path; ++l) {
      fold_dev(f, l) =
          opts.cv_metric == CvMetric::deviance
              ? detail::binomial_deviance(xte, yte, coefs(0, l), coefs.col(l).tail(p),
                                          opts.prob_clamp)
              : detail::classification_error(xte, yte, coefs(0, l), coefs.col(l).tail(p));
    }
  }

  fit.cv_mean = fold_dev.colwise().mean();
  fit.cv_se.resize(path);
  for (int l = 0; l < path; ++l) {
    const double m = fit.cv_mean(l);
    const double var =
        (fold_dev.col(l).array() - m).square().sum() / (opts.folds - 1);
    fit.cv_se(l) = std::sqrt(var / opts.folds);
  }

  // minCoeff reports the first index attaining the minimum, i.e. the largest
  // lambda among ties; under class_error whole stretches of the path tie at
  // the minimal error rate, and the largest such lambda is the sparsest
  // model that achieves it.
  Eigen::Index imin = 0;
  fit.cv_mean.minCoeff(&imin);
  fit.index_min = static_cast<int>(imin);
  const double bar = fit.cv_mean(imin) + fit.cv_se(imin);
  int chosen = fit.index_min;
  for (int l = 0; l <= fit.index_min; ++l) {
    if (fit.cv_mean(l) <= bar) {
      chosen = l;
      break;
    }
  }
  fit.index_1se = chosen;
  fit.lambda = fit.lambda_path(chosen);

  double b0 = full_coefs(0, chosen);
  for (int j : active) {
    const double bj = full_coefs(j + 1, chosen);
    if (bj != 0.0) {
      fit.coefficients(j) = bj / sd(j);
      b0 -= bj * mu(j) / sd(j);
    }
  }
  fit.intercept = b0;
  return fit;
}

}  // namespace jurysim
