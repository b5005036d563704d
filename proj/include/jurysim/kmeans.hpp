#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "jurysim/clustering.hpp"
#include "jurysim/random.hpp"

namespace jurysim {

struct KMeansOptions {
  int restarts = 10;
  int max_iter = 500;
};

struct KMeansModel {
  int k = 0;
  Eigen::MatrixXd centroids;  // k x d
  Eigen::VectorXi assignments;
  double dispersion = 0.0;                // within-cluster sum of squares
  std::vector<double> dispersion_trace;   // per Lloyd iteration, non-increasing
};

namespace detail {

// Nearest centroid per point (ties to the lowest index).
inline void assign_nearest(const Eigen::Ref<const Eigen::MatrixXd>& pts,
                           const Eigen::MatrixXd& centroids, Eigen::VectorXi& assignments,
                           Eigen::VectorXd& dist2) {
  const auto n = pts.rows();
  const auto k = centroids.rows();
  // ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2; the ||x||^2 term is constant per
  // row and irrelevant to the argmin, but needed for the dispersion value.
  Eigen::MatrixXd cross = pts * centroids.transpose();  // n x k
  Eigen::VectorXd cnorm = centroids.rowwise().squaredNorm();
  Eigen::VectorXd xnorm = pts.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    double best_val = cnorm(0) - 2.0 * cross(i, 0);
    for (Eigen::Index j = 1; j < k; ++j) {
      const double v = cnorm(j) - 2.0 * cross(i, j);
      if (v < best_val) {
        best_val = v;
        best = j;
      }
    }
    assignments(i) = static_cast<int>(best);
    dist2(i) = std::max(0.0, xnorm(i) + best_val);
  }
}

inline KMeansModel lloyd_once(const Eigen::Ref<const Eigen::MatrixXd>& pts, int k,
                              RandomStream& rng, const KMeansOptions& opts) {
  const auto n = pts.rows();
  const auto d = pts.cols();
  KMeansModel model;
  model.k = k;
  model.centroids = kmeanspp_centroids(pts, k, rng);
  model.assignments.resize(n);

  Eigen::VectorXd dist2(n);
  Eigen::VectorXi previous;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    assign_nearest(pts, model.centroids, model.assignments, dist2);

    // Re-seed any empty cluster at the point farthest from its own centroid.
    Eigen::VectorXi sizes = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) sizes(model.assignments(i))++;
    for (int j = 0; j < k; ++j) {
      if (sizes(j) > 0) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (sizes(model.assignments(i)) > 1 && dist2(i) > far_d) {
          far_d = dist2(i);
          far = i;
        }
      }
      if (far_d < 0.0) continue;  // no donor cluster; possible only when k > distinct points
      sizes(model.assignments(far))--;
      model.assignments(far) = j;
      sizes(j) = 1;
      dist2(far) = 0.0;
      model.centroids.row(j) = pts.row(far);
    }

    // Update step: centroids move to cluster means.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
    for (Eigen::Index i = 0; i < n; ++i) sums.row(model.assignments(i)) += pts.row(i);
    for (int j = 0; j < k; ++j) {
      if (sizes(j) > 0) model.centroids.row(j) = sums.row(j) / sizes(j);
    }

    double wss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      wss += (pts.row(i) - model.centroids.row(model.assignments(i))).squaredNorm();
    }
    model.dispersion_trace.push_back(wss);
    model.dispersion = wss;

    if (previous.size() == n && (previous.array() == model.assignments.array()).all()) break;
    previous = model.assignments;
  }
  return model;
}

}  // namespace detail

// Lloyd's algorithm run to a fixed point, best of opts.restarts seeded
// k-means++ starts (lowest dispersion wins, first on ties).
inline KMeansModel fit_kmeans(const Eigen::Ref<const Eigen::MatrixXd>& pts, int k,
                              const RandomStream& rng, const KMeansOptions& opts = {}) {
  if (pts.rows() < 1) throw std::invalid_argument("fit_kmeans: no points");
  if (k < 1 || pts.rows() < k) throw std::invalid_argument("fit_kmeans: need 1 <= k <= points");
  if (opts.restarts < 1) throw std::invalid_argument("fit_kmeans: restarts must be >= 1");
  KMeansModel best;
  for (int r = 0; r < opts.restarts; ++r) {
    RandomStream restart = rng.child(static_cast<std::uint64_t>(r));
    KMeansModel model = detail::lloyd_once(pts, k, restart, opts);
    if (r == 0 || model.dispersion < best.dispersion) best = std::move(model);
  }
  return best;
}

struct GapOptions {
  int num_refs = 25;  // reference datasets per candidate k
  KMeansOptions kmeans;
};

// Gap-statistic model selection:
//   Gap(k) = mean_b log W_k(ref_b) - log W_k(data)
// with reference sets drawn uniformly over the data's per-dimension bounding
// box, drawn once and reused for every k.  Chooses the smallest k with
// Gap(k) >= Gap(k+1) - s_{k+1}; if none qualifies, the k with the largest gap.
inline ClusteringResult select_kmeans_gap(const Eigen::Ref<const Eigen::MatrixXd>& pts,
                                          const KRange& range, const RandomStream& rng,
                                          const GapOptions& opts = {}) {
  range.validate();
  if (pts.rows() < range.hi) throw std::invalid_argument("select_kmeans_gap: fewer points than max k");
  if (opts.num_refs < 2) throw std::invalid_argument("select_kmeans_gap: need at least 2 references");

  const auto n = pts.rows();
  const auto d = pts.cols();
  const Eigen::RowVectorXd lo = pts.colwise().minCoeff();
  const Eigen::RowVectorXd span = pts.colwise().maxCoeff() - lo;

  std::vector<Eigen::MatrixXd> refs(static_cast<std::size_t>(opts.num_refs));
  for (int b = 0; b < opts.num_refs; ++b) {
    RandomStream ref_rng = rng.child(0x726566ULL).child(static_cast<std::uint64_t>(b));
    Eigen::MatrixXd& ref = refs[static_cast<std::size_t>(b)];
    ref.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < d; ++c) ref(i, c) = lo(c) + span(c) * ref_rng.uniform01();
    }
  }

  const auto safe_log = [](double w) {
    return std::log(std::max(w, std::numeric_limits<double>::min()));
  };

  const int num_k = range.hi - range.lo + 1;
  std::vector<KMeansModel> data_fits(static_cast<std::size_t>(num_k));
  ClusteringResult result;
  result.method = ClusterMethod::KMeans;
  result.trace.reserve(static_cast<std::size_t>(num_k));

  for (int k = range.lo; k <= range.hi; ++k) {
    const auto slot = static_cast<std::size_t>(k - range.lo);
    data_fits[slot] = fit_kmeans(pts, k, rng.child(static_cast<std::uint64_t>(k) * 2), opts.kmeans);
    double mean_ref = 0.0, m2 = 0.0;
    for (int b = 0; b < opts.num_refs; ++b) {
      const KMeansModel ref_fit =
          fit_kmeans(refs[static_cast<std::size_t>(b)], k,
                     rng.child(static_cast<std::uint64_t>(k) * 2 + 1).child(static_cast<std::uint64_t>(b)),
                     opts.kmeans);
      const double lw = safe_log(ref_fit.dispersion);
      const double delta = lw - mean_ref;
      mean_ref += delta / (b + 1);
      m2 += delta * (lw - mean_ref);
    }
    const double sd = std::sqrt(m2 / opts.num_refs);
    const double sk = sd * std::sqrt(1.0 + 1.0 / opts.num_refs);
    result.trace.push_back({k, mean_ref - safe_log(data_fits[slot].dispersion), sk});
  }

  int chosen = -1;
  for (std::size_t i = 0; i + 1 < result.trace.size(); ++i) {
    if (result.trace[i].score >= result.trace[i + 1].score - result.trace[i + 1].spread) {
      chosen = result.trace[i].k;
      break;
    }
  }
  if (chosen < 0) {
    chosen = result.trace.front().k;
    double best = result.trace.front().score;
    for (const KScore& ks : result.trace) {
      if (ks.score > best) {
        best = ks.score;
        chosen = ks.k;
      }
    }
  }

  result.assignments = data_fits[static_cast<std::size_t>(chosen - range.lo)].assignments;
  result.k = compact_labels(result.assignments, chosen);
  return result;
}

}  // namespace jurysim
