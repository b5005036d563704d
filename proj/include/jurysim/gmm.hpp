#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "jurysim/clustering.hpp"
#include "jurysim/random.hpp"

namespace jurysim {

struct GmmOptions {
  int restarts = 5;
  int max_iter = 500;
  double rel_tol = 1e-6;    // on log-likelihood change
  double cov_reg = 1e-6;    // diagonal regularizer, scaled by average data variance
  // Seed one extra EM candidate per k from a Ward-linkage cut of the points
  // (select_gmm_bic only).  The agglomerative seed is deterministic and
  // reaches separated-component optima that k-means++ restarts find only by
  // luck; without it, BIC can settle on a coarser k merely because the best
  // random fit at the finer k was a poor local optimum.
  bool hc_init = true;
};

struct GmmModel {
  int k = 0;
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;                    // k x d
  std::vector<Eigen::MatrixXd> covariances; // k matrices, d x d
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> loglik_trace;  // per EM iteration
};

namespace detail {

// Log-density of every point under every component, one component per column.
inline void gmm_log_prob(const Eigen::Ref<const Eigen::MatrixXd>& pts, const GmmModel& model,
                         Eigen::MatrixXd& logp) {
  const auto n = pts.rows();
  const auto d = pts.cols();
  logp.resize(n, model.k);
  for (int j = 0; j < model.k; ++j) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.covariances[static_cast<std::size_t>(j)]);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("fit_gmm: covariance lost positive definiteness");
    }
    const Eigen::MatrixXd& l = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) logdet += 2.0 * std::log(l(c, c));
    Eigen::MatrixXd centered = (pts.rowwise() - model.means.row(j)).transpose();
    l.triangularView<Eigen::Lower>().solveInPlace(centered);
    logp.col(j) = -0.5 * (centered.colwise().squaredNorm().array() + logdet +
                          d * std::log(2.0 * std::numbers::pi)) +
                  std::log(model.weights(j));
  }
}

// E-step: responsibilities plus the total log-likelihood.
inline double gmm_responsibilities(const Eigen::Ref<const Eigen::MatrixXd>& pts,
                                   const GmmModel& model, Eigen::MatrixXd& resp) {
  gmm_log_prob(pts, model, resp);
  double loglik = 0.0;
  for (Eigen::Index i = 0; i < resp.rows(); ++i) {
    const double mx = resp.row(i).maxCoeff();
    const double lse = mx + std::log((resp.row(i).array() - mx).exp().sum());
    loglik += lse;
    resp.row(i) = (resp.row(i).array() - lse).exp();
  }
  return loglik;
}

// EM iterations from an already-initialized model, in place.
inline void em_iterate(const Eigen::Ref<const Eigen::MatrixXd>& pts, GmmModel& model,
                       const GmmOptions& opts, double reg) {
  const auto n = pts.rows();
  const int k = model.k;
  Eigen::MatrixXd resp;
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const double loglik = gmm_responsibilities(pts, model, resp);
    model.loglik = loglik;
    model.loglik_trace.push_back(loglik);
    if (iter > 0 && std::abs(loglik - prev) <= opts.rel_tol * (1.0 + std::abs(loglik))) break;
    prev = loglik;

    // M-step.
    Eigen::VectorXd nj = resp.colwise().sum();
    for (int j = 0; j < k; ++j) {
      if (nj(j) < 1e-10) {
        // Component starved of responsibility: freeze it with ~zero weight.
        model.weights(j) = nj(j) / static_cast<double>(n);
        continue;
      }
      model.weights(j) = nj(j) / static_cast<double>(n);
      model.means.row(j) = resp.col(j).transpose() * pts / nj(j);
      Eigen::MatrixXd dev = pts.rowwise() - model.means.row(j);
      Eigen::MatrixXd cov =
          dev.transpose() * resp.col(j).asDiagonal() * dev / nj(j);
      cov.diagonal().array() += reg;
      model.covariances[static_cast<std::size_t>(j)] = cov;
    }
  }
}

inline GmmModel em_once(const Eigen::Ref<const Eigen::MatrixXd>& pts, int k, RandomStream& rng,
                        const GmmOptions& opts, double reg) {
  const auto n = pts.rows();

  GmmModel model;
  model.k = k;
  model.means = kmeanspp_centroids(pts, k, rng);
  model.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  Eigen::RowVectorXd mean = pts.colwise().mean();
  Eigen::MatrixXd centered = pts.rowwise() - mean;
  Eigen::MatrixXd global_cov = centered.transpose() * centered / static_cast<double>(n);
  global_cov.diagonal().array() += reg;
  model.covariances.assign(static_cast<std::size_t>(k), global_cov);

  em_iterate(pts, model, opts, reg);
  return model;
}

// EM started from a hard partition: each component's initial moments are its
// group's weight, mean, and scatter.
inline GmmModel em_seeded(const Eigen::Ref<const Eigen::MatrixXd>& pts,
                          const Eigen::Ref<const Eigen::VectorXi>& init, int k,
                          const GmmOptions& opts, double reg) {
  const auto n = pts.rows();
  const auto d = pts.cols();

  GmmModel model;
  model.k = k;
  model.weights = Eigen::VectorXd::Zero(k);
  model.means = Eigen::MatrixXd::Zero(k, d);
  model.covariances.assign(static_cast<std::size_t>(k), Eigen::MatrixXd::Zero(d, d));

  Eigen::VectorXd nj = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int j = init(i);
    nj(j) += 1.0;
    model.means.row(j) += pts.row(i);
  }
  if ((nj.array() == 0.0).any()) throw std::runtime_error("em_seeded: empty seed group");
  model.means.array().colwise() /= nj.array();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int j = init(i);
    const Eigen::RowVectorXd dev = pts.row(i) - model.means.row(j);
    model.covariances[static_cast<std::size_t>(j)] += dev.transpose() * dev;
  }
  for (int j = 0; j < k; ++j) {
    model.covariances[static_cast<std::size_t>(j)] /= nj(j);
    model.covariances[static_cast<std::size_t>(j)].diagonal().array() += reg;
    model.weights(j) = nj(j) / static_cast<double>(n);
  }

  em_iterate(pts, model, opts, reg);
  return model;
}

// Diagonal covariance floor used by every EM start on the same data.
inline double cov_regularizer(const Eigen::Ref<const Eigen::MatrixXd>& pts,
                              const GmmOptions& opts) {
  Eigen::RowVectorXd mean = pts.colwise().mean();
  const double avg_var = (pts.rowwise() - mean).array().square().colwise().mean().mean();
  return opts.cov_reg * std::max(avg_var, std::numeric_limits<double>::min());
}

struct WardMerge {
  double cost = 0.0;  // within-cluster sum-of-squares increase of this merge
  int a = 0;          // one leaf from each side; replaying a/b through a
  int b = 0;          // union-find reconstructs the dendrogram's cuts
};

// Agglomerative Ward linkage by the nearest-neighbor chain algorithm.  Ward's
// criterion is reducible, so mutual nearest neighbors can be merged as soon
// as they meet and the chain stays valid across merges; the full dendrogram
// costs come out monotone once sorted.
inline std::vector<WardMerge> ward_linkage(const Eigen::Ref<const Eigen::MatrixXd>& pts) {
  const int n = static_cast<int>(pts.rows());
  std::vector<Eigen::RowVectorXd> centroid(static_cast<std::size_t>(n));
  std::vector<double> size(static_cast<std::size_t>(n), 1.0);
  std::vector<bool> alive(static_cast<std::size_t>(n), true);
  for (int i = 0; i < n; ++i) centroid[static_cast<std::size_t>(i)] = pts.row(i);

  const auto merge_cost = [&](int i, int j) {
    const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
    return size[si] * size[sj] / (size[si] + size[sj]) *
           (centroid[si] - centroid[sj]).squaredNorm();
  };

  std::vector<WardMerge> merges;
  merges.reserve(static_cast<std::size_t>(n - 1));
  std::vector<int> chain;
  chain.reserve(static_cast<std::size_t>(n));
  int first_alive = 0;
  while (static_cast<int>(merges.size()) < n - 1) {
    if (chain.empty()) {
      while (!alive[static_cast<std::size_t>(first_alive)]) ++first_alive;
      chain.push_back(first_alive);
    }
    const int top = chain.back();
    const int prev = chain.size() >= 2 ? chain[chain.size() - 2] : -1;
    int nn = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (!alive[static_cast<std::size_t>(j)] || j == top) continue;
      const double c = merge_cost(top, j);
      if (c < best) {
        best = c;
        nn = j;
      }
    }
    if (prev >= 0 && merge_cost(top, prev) <= best) nn = prev;  // ties go reciprocal
    if (nn == prev && prev >= 0) {
      // Mutual nearest neighbors: merge into prev's slot, retire top's.
      chain.pop_back();
      chain.pop_back();
      const auto st = static_cast<std::size_t>(top), sp = static_cast<std::size_t>(prev);
      merges.push_back({merge_cost(top, prev), prev, top});
      const double w = size[st] + size[sp];
      centroid[sp] = (size[st] * centroid[st] + size[sp] * centroid[sp]) / w;
      size[sp] = w;
      alive[st] = false;
    } else {
      chain.push_back(nn);
    }
  }
  return merges;
}

// The k-cluster cut of a Ward dendrogram: replay merges cheapest-first until
// k components remain, then compact labels by first appearance.
inline Eigen::VectorXi ward_cut(std::vector<WardMerge> merges, Eigen::Index n, int k) {
  std::stable_sort(merges.begin(), merges.end(),
                   [](const WardMerge& x, const WardMerge& y) { return x.cost < y.cost; });
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };

  Eigen::Index components = n;
  for (const WardMerge& m : merges) {
    if (components <= k) break;
    const int ra = find(m.a);
    const int rb = find(m.b);
    if (ra == rb) continue;
    parent[static_cast<std::size_t>(rb)] = ra;
    --components;
  }

  Eigen::VectorXi labels(n);
  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int r = find(static_cast<int>(i));
    if (remap[static_cast<std::size_t>(r)] < 0) remap[static_cast<std::size_t>(r)] = next++;
    labels(i) = remap[static_cast<std::size_t>(r)];
  }
  return labels;
}

}  // namespace detail

// Full-covariance Gaussian mixture via EM, best of opts.restarts runs seeded
// from k-means++ centroids (highest final log-likelihood wins).  Covariances
// get a fixed diagonal boost of cov_reg times the average per-dimension data
// variance each M-step; a restart whose covariance still degenerates is
// dropped and another one is attempted in its place.
inline GmmModel fit_gmm(const Eigen::Ref<const Eigen::MatrixXd>& pts, int k,
                        const RandomStream& rng, const GmmOptions& opts = {}) {
  if (pts.rows() < 1) throw std::invalid_argument("fit_gmm: no points");
  if (k < 1 || pts.rows() < k) throw std::invalid_argument("fit_gmm: need 1 <= k <= points");
  if (opts.restarts < 1) throw std::invalid_argument("fit_gmm: restarts must be >= 1");

  const double reg = detail::cov_regularizer(pts, opts);

  GmmModel best;
  int successes = 0;
  const int max_attempts = opts.restarts * 2;
  for (int attempt = 0; attempt < max_attempts && successes < opts.restarts; ++attempt) {
    RandomStream restart = rng.child(static_cast<std::uint64_t>(attempt));
    try {
      GmmModel model = detail::em_once(pts, k, restart, opts, reg);
      if (!std::isfinite(model.loglik)) continue;
      if (successes == 0 || model.loglik > best.loglik) best = std::move(model);
      ++successes;
    } catch (const std::runtime_error&) {
      // degenerate restart; try the next seed
    }
  }
  if (successes == 0) throw std::runtime_error("fit_gmm: every EM restart degenerated");
  return best;
}

// Max-responsibility assignment under a fitted model (ties to the lowest
// component index).
inline Eigen::VectorXi gmm_hard_assignments(const Eigen::Ref<const Eigen::MatrixXd>& pts,
                                            const GmmModel& model) {
  Eigen::MatrixXd logp;
  detail::gmm_log_prob(pts, model, logp);
  Eigen::VectorXi assignments(pts.rows());
  for (Eigen::Index i = 0; i < logp.rows(); ++i) {
    Eigen::Index best = 0;
    logp.row(i).maxCoeff(&best);
    assignments(i) = static_cast<int>(best);
  }
  return assignments;
}

// Number of free parameters of a k-component full-covariance mixture in d
// dimensions: (k - 1) mixing weights, k*d means, k*d*(d+1)/2 covariances.
inline int gmm_num_params(int k, int d) { return (k - 1) + k * d + k * d * (d + 1) / 2; }

// BIC model selection over a k range: fits each candidate and keeps the
// minimizer of -2 loglik + params * ln(n).  Ties break toward smaller k.
// Clusters left empty by the hard assignment are compacted away.  Besides
// the random restarts, every k also tries one EM run seeded from the same
// Ward dendrogram's k-cut (see GmmOptions::hc_init); the candidate with the
// higher log-likelihood represents that k.
inline ClusteringResult select_gmm_bic(const Eigen::Ref<const Eigen::MatrixXd>& pts,
                                       const KRange& range, const RandomStream& rng,
                                       const GmmOptions& opts = {}) {
  range.validate();
  if (pts.rows() < range.hi) throw std::invalid_argument("select_gmm_bic: fewer points than max k");

  const double log_n = std::log(static_cast<double>(pts.rows()));
  const auto d = static_cast<int>(pts.cols());
  const double reg = detail::cov_regularizer(pts, opts);

  std::vector<detail::WardMerge> merges;
  if (opts.hc_init) merges = detail::ward_linkage(pts);

  ClusteringResult result;
  result.method = ClusterMethod::Gmm;
  GmmModel best;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int k = range.lo; k <= range.hi; ++k) {
    GmmModel model = fit_gmm(pts, k, rng.child(static_cast<std::uint64_t>(k)), opts);
    if (opts.hc_init) {
      try {
        GmmModel seeded =
            detail::em_seeded(pts, detail::ward_cut(merges, pts.rows(), k), k, opts, reg);
        if (std::isfinite(seeded.loglik) && seeded.loglik > model.loglik) {
          model = std::move(seeded);
        }
      } catch (const std::runtime_error&) {
        // degenerate seed for this k; the restart winner stands
      }
    }
    const double bic = -2.0 * model.loglik + gmm_num_params(k, d) * log_n;
    result.trace.push_back({k, bic, 0.0});
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(model);
    }
  }

  result.assignments = gmm_hard_assignments(pts, best);
  result.k = compact_labels(result.assignments, best.k);
  return result;
}

}  // namespace jurysim
