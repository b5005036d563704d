#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "jurysim/random.hpp"

namespace jurysim {

enum class ClusterMethod { Gmm, KMeans };

inline const char* method_name(ClusterMethod m) {
  return m == ClusterMethod::Gmm ? "gmm" : "km";
}

struct KRange {
  int lo = 2;
  int hi = 20;

  void validate() const {
    if (lo < 1 || hi < lo) throw std::invalid_argument("KRange: need 1 <= lo <= hi");
  }
};

// One model-selection candidate: its score (BIC or gap) and, for the gap
// statistic, the reference spread s_k used by the selection rule.
struct KScore {
  int k = 0;
  double score = 0.0;
  double spread = 0.0;
};

struct ClusteringResult {
  ClusterMethod method = ClusterMethod::Gmm;
  int k = 0;                       // clusters actually populated
  Eigen::VectorXi assignments;     // per point, in [0, k)
  std::vector<KScore> trace;       // one entry per candidate k
};

// Relabels assignments to drop empty clusters, preserving first-appearance
// order of the survivors; returns the compacted cluster count.
inline int compact_labels(Eigen::VectorXi& assignments, int k) {
  std::vector<int> remap(static_cast<std::size_t>(k), -1);
  int next = 0;
  for (Eigen::Index i = 0; i < assignments.size(); ++i) {
    int& slot = remap[static_cast<std::size_t>(assignments(i))];
    if (slot < 0) slot = next++;
    assignments(i) = slot;
  }
  return next;
}

// k-means++ seeding: spread initial centroids with squared-distance weighting.
inline Eigen::MatrixXd kmeanspp_centroids(const Eigen::Ref<const Eigen::MatrixXd>& pts, int k,
                                          RandomStream& rng) {
  const auto n = pts.rows();
  if (k < 1 || n < k) throw std::invalid_argument("kmeanspp_centroids: need 1 <= k <= points");
  Eigen::MatrixXd centroids(k, pts.cols());
  centroids.row(0) = pts.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 = (pts.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform01() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= d2(i);
        if (u <= 0.0) {
          pick = i;
          break;
        }
        pick = i;  // guards against round-off leaving u slightly positive
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centroids.row(j) = pts.row(pick);
    d2 = d2.cwiseMin((pts.rowwise() - centroids.row(j)).rowwise().squaredNorm());
  }
  return centroids;
}

}  // namespace jurysim
