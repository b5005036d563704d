#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "jurysim/engine.hpp"
#include "jurysim/gmm.hpp"
#include "jurysim/kmeans.hpp"
#include "jurysim/lasso.hpp"
#include "jurysim/numerics.hpp"

namespace jurysim {

enum class Label : std::uint8_t { Authentic, Inauthentic };

inline const char* label_name(Label l) { return l == Label::Authentic ? "authentic" : "inauthentic"; }

// Per-round mean vote of every cluster, paired with the round's quality: the
// design the cluster labeler regresses on.
inline ClusterDesign cluster_mean_votes(const RunData& data, const Eigen::VectorXi& assignments,
                                        int k) {
  const int r = data.rounds();
  const int n = data.agents();
  if (assignments.size() != n) {
    throw std::invalid_argument("cluster_mean_votes: one assignment per agent required");
  }
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
  for (int a = 0; a < n; ++a) {
    const int c = assignments(a);
    if (c < 0 || c >= k) throw std::invalid_argument("cluster_mean_votes: assignment out of range");
    counts(c) += 1.0;
  }
  if ((counts.array() == 0.0).any()) {
    throw std::invalid_argument("cluster_mean_votes: empty cluster");
  }

  ClusterDesign design;
  design.mean_votes = Eigen::MatrixXd::Zero(r, k);
  for (int a = 0; a < n; ++a) {
    design.mean_votes.col(assignments(a)) += data.votes.col(a).cast<double>();
  }
  design.mean_votes.array().rowwise() /= counts.transpose().array();
  design.response.resize(static_cast<std::size_t>(r));
  for (int t = 0; t < r; ++t) design.response[static_cast<std::size_t>(t)] = data.props[static_cast<std::size_t>(t)].p1;
  return design;
}

// A cluster whose mean vote earns a nonzero lasso coefficient carries
// independent information about quality, the signature of authentic voting;
// a zeroed cluster is flagged as coordinated.
inline std::vector<Label> label_clusters(const LassoFit& fit) {
  std::vector<Label> labels(static_cast<std::size_t>(fit.coefficients.size()));
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    labels[static_cast<std::size_t>(j)] =
        fit.coefficients(j) == 0.0 ? Label::Inauthentic : Label::Authentic;
  }
  return labels;
}

struct ClassifyOptions {
  int bootstraps = 5;
  int threshold = 4;  // authentic labels required for a final authentic call
  int q = 2;          // spectral components fed to the clusterer
  KRange k_range{2, 20};
  GmmOptions gmm;
  GapOptions gap;
  LassoOptions lasso;

  void validate() const {
    if (bootstraps < 1) throw std::invalid_argument("ClassifyOptions: bootstraps must be >= 1");
    if (threshold < 0 || threshold > bootstraps) {
      throw std::invalid_argument("ClassifyOptions: threshold must lie in [0, bootstraps]");
    }
    if (q < 1) throw std::invalid_argument("ClassifyOptions: q must be >= 1");
    k_range.validate();
  }
};

// Per-agent labels from each bootstrap pass plus the aggregated verdict.
struct AgentLabeling {
  int bootstraps = 0;
  int threshold = 0;
  std::vector<std::vector<Label>> boot_labels;  // [bootstrap][agent]
  std::vector<Label> final_labels;

  int agents() const { return static_cast<int>(final_labels.size()); }
};

// Final verdicts: authentic iff at least `threshold` passes said so.
inline std::vector<Label> aggregate_final_labels(const std::vector<std::vector<Label>>& boot_labels,
                                                 int threshold) {
  if (boot_labels.empty()) throw std::invalid_argument("aggregate_final_labels: no passes");
  const std::size_t n = boot_labels.front().size();
  std::vector<Label> finals(n);
  for (std::size_t a = 0; a < n; ++a) {
    int authentic = 0;
    for (const auto& pass : boot_labels) {
      if (pass.size() != n) throw std::invalid_argument("aggregate_final_labels: ragged passes");
      if (pass[a] == Label::Authentic) ++authentic;
    }
    finals[a] = authentic >= threshold ? Label::Authentic : Label::Inauthentic;
  }
  return finals;
}

// The detection pipeline for one run: bootstrap the rounds, embed agents by
// the dominant spectral components of their vote correlations, cluster,
// label clusters by lasso regression of quality on cluster mean votes, and
// keep an agent authentic only if enough bootstrap passes agree.
inline AgentLabeling classify_agents(const RunData& data, ClusterMethod method,
                                     const RandomStream& rng, const ClassifyOptions& opts = {}) {
  opts.validate();
  const int n = data.agents();
  if (data.rounds() < 2) throw std::invalid_argument("classify_agents: need at least 2 rounds");

  AgentLabeling out;
  out.bootstraps = opts.bootstraps;
  out.threshold = opts.threshold;
  out.boot_labels.reserve(static_cast<std::size_t>(opts.bootstraps));

  for (int b = 0; b < opts.bootstraps; ++b) {
    RandomStream boot_rng = rng.child(static_cast<std::uint64_t>(b));
    const RunData sample = bootstrap_rounds(data, boot_rng);

    const Matrix corr = correlation_matrix(sample.votes);
    const SpectralDecomposition spectral = decompose(corr);
    const Matrix scores = component_scores(spectral, std::min(opts.q, n));

    const RandomStream cluster_rng = boot_rng.child(0x636c7573ULL);  // "clus"
    const ClusteringResult clusters =
        method == ClusterMethod::Gmm
            ? select_gmm_bic(scores, opts.k_range, cluster_rng, opts.gmm)
            : select_kmeans_gap(scores, opts.k_range, cluster_rng, opts.gap);

    const ClusterDesign design = cluster_mean_votes(sample, clusters.assignments, clusters.k);
    const LassoFit fit = lasso_logistic(design, boot_rng.child(0x6c6173ULL), opts.lasso);  // "las"
    const std::vector<Label> cluster_labels = label_clusters(fit);

    std::vector<Label> agent_labels(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      agent_labels[static_cast<std::size_t>(a)] =
          cluster_labels[static_cast<std::size_t>(clusters.assignments(a))];
    }
    out.boot_labels.push_back(std::move(agent_labels));
  }

  out.final_labels = aggregate_final_labels(out.boot_labels, opts.threshold);
  return out;
}

// A jury is just the sorted id set of admitted agents.
struct Jury {
  std::vector<int> agents;

  int size() const { return static_cast<int>(agents.size()); }
};

// Every member of the population the pipeline finally labeled authentic.
inline Jury select_jury(const AgentLabeling& labeling) {
  Jury jury;
  for (int a = 0; a < labeling.agents(); ++a) {
    if (labeling.final_labels[static_cast<std::size_t>(a)] == Label::Authentic) {
      jury.agents.push_back(a);
    }
  }
  return jury;
}

// Misclassification statistics for one agent type across runs: for the
// authentic type the rate of false inauthentic calls, for inauthentic types
// the rate of missed detections.
struct TypeMisclass {
  double mean = 0.0;
  double sd = 0.0;
};

struct MisclassSummary {
  std::array<std::optional<TypeMisclass>, kNumAgentTypes> by_type;
};

enum class JuryMode { Best, Average, Worst };

inline const char* jury_mode_name(JuryMode m) {
  switch (m) {
    case JuryMode::Best: return "best";
    case JuryMode::Average: return "average";
    case JuryMode::Worst: return "worst";
  }
  return "average";
}

// The jury the pipeline's error rates imply: per type, keep the first
// floor(count * share) roster members, where the admitted share is the mean
// error rate shifted two standard deviations toward the favorable (best) or
// unfavorable (worst) side and clamped to [0, 1].
inline Jury expected_jury(const Population& pop, const MisclassSummary& summary, JuryMode mode) {
  Jury jury;
  for (AgentType t : kAgentTypes) {
    const int c = pop.count(t);
    if (c == 0) continue;
    const auto& entry = summary.by_type[static_cast<std::size_t>(type_index(t))];
    if (!entry) {
      throw std::invalid_argument("expected_jury: no misclassification entry for a present type");
    }
    double delta = entry->mean;
    if (mode == JuryMode::Best) delta = std::max(0.0, delta - 2.0 * entry->sd);
    if (mode == JuryMode::Worst) delta = std::min(delta + 2.0 * entry->sd, 1.0);
    const double share = t == AgentType::Authentic ? 1.0 - delta : delta;
    const int keep = std::min(static_cast<int>(std::floor(c * share)), c);
    const std::vector<int> ids = pop.agents_of_type(t);
    for (int i = 0; i < keep; ++i) jury.agents.push_back(ids[static_cast<std::size_t>(i)]);
  }
  std::sort(jury.agents.begin(), jury.agents.end());
  return jury;
}

}  // namespace jurysim
