#include <algorithm>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "jurysim/labeling.hpp"
#include "jurysim/metrics.hpp"

using namespace jurysim;

TEST_CASE("cluster mean votes average the right columns per round", "[labeling]") {
  RunData data;
  data.votes.resize(3, 4);
  // Agents 0,2 form cluster 0; agents 1,3 cluster 1.
  data.votes << 1, 1, 1, -1,    // round 0: c0 mean 1, c1 mean 0
      -1, 1, 1, 1,              // round 1: c0 mean 0, c1 mean 1
      -1, -1, -1, -1;           // round 2: both -1
  data.props = {{1, 1, 1}, {-1, 1, 1}, {1, -1, 1}};
  Eigen::VectorXi assignments(4);
  assignments << 0, 1, 0, 1;
  const ClusterDesign design = cluster_mean_votes(data, assignments, 2);
  REQUIRE(design.mean_votes.rows() == 3);
  REQUIRE(design.mean_votes.cols() == 2);
  REQUIRE(design.mean_votes(0, 0) == 1.0);
  REQUIRE(design.mean_votes(0, 1) == 0.0);
  REQUIRE(design.mean_votes(1, 0) == 0.0);
  REQUIRE(design.mean_votes(1, 1) == 1.0);
  REQUIRE(design.mean_votes(2, 0) == -1.0);
  REQUIRE(design.mean_votes(2, 1) == -1.0);
  REQUIRE(design.response == std::vector<std::int8_t>{1, -1, 1});
}

TEST_CASE("cluster mean votes validate their inputs", "[labeling]") {
  RunData data;
  data.votes.resize(2, 3);
  data.votes.setOnes();
  data.props = {{}, {}};
  Eigen::VectorXi wrong_size(2);
  wrong_size << 0, 1;
  REQUIRE_THROWS_AS(cluster_mean_votes(data, wrong_size, 2), std::invalid_argument);
  Eigen::VectorXi out_of_range(3);
  out_of_range << 0, 1, 2;
  REQUIRE_THROWS_AS(cluster_mean_votes(data, out_of_range, 2), std::invalid_argument);
  Eigen::VectorXi empty_cluster(3);
  empty_cluster << 0, 0, 0;
  REQUIRE_THROWS_AS(cluster_mean_votes(data, empty_cluster, 2), std::invalid_argument);
}

TEST_CASE("zero lasso coefficients mark clusters inauthentic", "[labeling]") {
  LassoFit fit;
  fit.coefficients.resize(3);
  fit.coefficients << 0.8, 0.0, -0.3;
  const std::vector<Label> labels = label_clusters(fit);
  REQUIRE(labels == std::vector<Label>{Label::Authentic, Label::Inauthentic, Label::Authentic});
  REQUIRE(std::string(label_name(Label::Authentic)) == "authentic");
  REQUIRE(std::string(label_name(Label::Inauthentic)) == "inauthentic");
}

TEST_CASE("final labels follow the at-least-threshold rule on all 32 patterns", "[labeling]") {
  for (int threshold : {4, 3}) {
    for (int mask = 0; mask < 32; ++mask) {
      std::vector<std::vector<Label>> passes(5, std::vector<Label>(1));
      int authentic = 0;
      for (int b = 0; b < 5; ++b) {
        const bool bit = mask & (1 << b);
        passes[static_cast<std::size_t>(b)][0] = bit ? Label::Authentic : Label::Inauthentic;
        authentic += bit ? 1 : 0;
      }
      const std::vector<Label> finals = aggregate_final_labels(passes, threshold);
      INFO("mask=" << mask << " threshold=" << threshold);
      REQUIRE(finals[0] == (authentic >= threshold ? Label::Authentic : Label::Inauthentic));
    }
  }
  REQUIRE_THROWS_AS(aggregate_final_labels({}, 1), std::invalid_argument);
}

TEST_CASE("select_jury keeps exactly the final authentic agents", "[labeling]") {
  AgentLabeling labeling;
  labeling.final_labels = {Label::Authentic, Label::Inauthentic, Label::Authentic,
                           Label::Inauthentic, Label::Authentic};
  const Jury jury = select_jury(labeling);
  REQUIRE(jury.agents == std::vector<int>{0, 2, 4});
  REQUIRE(jury.size() == 3);
}

TEST_CASE("classify options are validated", "[labeling]") {
  ClassifyOptions opts;
  opts.bootstraps = 0;
  REQUIRE_THROWS_AS(opts.validate(), std::invalid_argument);
  opts = {};
  opts.threshold = 6;
  REQUIRE_THROWS_AS(opts.validate(), std::invalid_argument);
  opts = {};
  opts.q = 0;
  REQUIRE_THROWS_AS(opts.validate(), std::invalid_argument);
  opts = {};
  opts.k_range = {5, 2};
  REQUIRE_THROWS_AS(opts.validate(), std::invalid_argument);
}

TEST_CASE("the pipeline separates coordinated voters from honest ones", "[labeling]") {
  // B_both agents vote the polarization flag: perfectly coordinated and
  // independent of quality.  Honest agents track quality individually.
  const Population pop = Population::pair(AgentType::BoosterBoth, 24, 12);
  const RunData data = simulate_run(pop, NoiseLevel::low(), 250, RandomStream(500).child(0));

  ClassifyOptions opts;
  opts.k_range = {2, 6};
  opts.gap.num_refs = 8;
  opts.gap.kmeans.restarts = 4;
  opts.gmm.restarts = 3;

  for (ClusterMethod method : {ClusterMethod::Gmm, ClusterMethod::KMeans}) {
    const AgentLabeling labeling = classify_agents(data, method, RandomStream(42), opts);
    REQUIRE(labeling.agents() == 36);
    REQUIRE(labeling.bootstraps == 5);
    REQUIRE(static_cast<int>(labeling.boot_labels.size()) == 5);

    int honest_ok = 0, coordinated_ok = 0;
    for (int a = 0; a < 24; ++a) {
      honest_ok += labeling.final_labels[static_cast<std::size_t>(a)] == Label::Authentic;
    }
    for (int a = 24; a < 36; ++a) {
      coordinated_ok += labeling.final_labels[static_cast<std::size_t>(a)] == Label::Inauthentic;
    }
    INFO(method_name(method));
    REQUIRE(honest_ok >= 22);
    REQUIRE(coordinated_ok == 12);
  }
}

TEST_CASE("classification is deterministic in its stream", "[labeling]") {
  const Population pop = Population::pair(AgentType::BoosterBoth, 10, 5);
  const RunData data = simulate_run(pop, NoiseLevel::low(), 80, RandomStream(3).child(0));
  ClassifyOptions opts;
  opts.k_range = {2, 4};
  opts.gap.num_refs = 5;
  opts.gap.kmeans.restarts = 2;
  opts.gmm.restarts = 2;
  for (ClusterMethod method : {ClusterMethod::Gmm, ClusterMethod::KMeans}) {
    const AgentLabeling a = classify_agents(data, method, RandomStream(77), opts);
    const AgentLabeling b = classify_agents(data, method, RandomStream(77), opts);
    REQUIRE(a.final_labels == b.final_labels);
    REQUIRE(a.boot_labels == b.boot_labels);
  }
}

TEST_CASE("expected juries keep floor(count * share) roster members", "[labeling]") {
  const Population pop = Population::booster_up();  // 100 A + 100 B_up
  MisclassSummary summary;
  summary.by_type[type_index(AgentType::Authentic)] = TypeMisclass{0.04, 0.01};
  summary.by_type[type_index(AgentType::BoosterUp)] = TypeMisclass{0.13, 0.0};

  const Jury average = expected_jury(pop, summary, JuryMode::Average);
  const Jury best = expected_jury(pop, summary, JuryMode::Best);
  const Jury worst = expected_jury(pop, summary, JuryMode::Worst);

  const auto count_below = [](const Jury& j, int bound) {
    return static_cast<int>(std::count_if(j.agents.begin(), j.agents.end(),
                                          [bound](int a) { return a < bound; }));
  };
  // Authentic share 1 - delta: avg 0.96 -> 96, best 0.98 -> 98, worst 0.94 -> 94.
  REQUIRE(count_below(average, 100) == 96);
  REQUIRE(count_below(best, 100) == 98);
  REQUIRE(count_below(worst, 100) == 94);
  // Booster share delta = 0.13 with zero spread in every mode.
  REQUIRE(average.size() - count_below(average, 100) == 13);
  REQUIRE(best.size() - count_below(best, 100) == 13);
  REQUIRE(worst.size() - count_below(worst, 100) == 13);
  // First-k roster members, sorted.
  REQUIRE(std::is_sorted(average.agents.begin(), average.agents.end()));
  REQUIRE(average.agents.front() == 0);
  REQUIRE(average.agents[95] == 95);
  REQUIRE(average.agents[96] == 100);
  REQUIRE(average.agents.back() == 112);
}

TEST_CASE("expected jury shares clamp to [0, 1]", "[labeling]") {
  const Population pop = Population::booster_up();
  MisclassSummary summary;
  summary.by_type[type_index(AgentType::Authentic)] = TypeMisclass{0.0, 0.0};
  summary.by_type[type_index(AgentType::BoosterUp)] = TypeMisclass{0.5, 0.3};

  const Jury best = expected_jury(pop, summary, JuryMode::Best);   // 0.5 - 0.6 -> 0
  const Jury worst = expected_jury(pop, summary, JuryMode::Worst); // 0.5 + 0.6 -> 1
  const auto boosters = [](const Jury& j) {
    return static_cast<int>(std::count_if(j.agents.begin(), j.agents.end(),
                                          [](int a) { return a >= 100; }));
  };
  REQUIRE(boosters(best) == 0);
  REQUIRE(boosters(worst) == 100);
  // All authentic agents stay in both.
  REQUIRE(best.size() == 100);
  REQUIRE(worst.size() == 200);
}

TEST_CASE("expected juries nest across modes", "[labeling]") {
  const Population pop = Population::all();
  MisclassSummary summary;
  for (AgentType t : kAgentTypes) {
    summary.by_type[type_index(t)] = TypeMisclass{0.2, 0.05};
  }
  const Jury best = expected_jury(pop, summary, JuryMode::Best);
  const Jury average = expected_jury(pop, summary, JuryMode::Average);
  const Jury worst = expected_jury(pop, summary, JuryMode::Worst);
  // Inauthentic members only grow toward worst; authentic members shrink.
  for (AgentType t : kAgentTypes) {
    const auto in_type = [&](const Jury& j) {
      const std::vector<int> ids = pop.agents_of_type(t);
      return static_cast<int>(std::count_if(j.agents.begin(), j.agents.end(), [&](int a) {
        return a >= ids.front() && a <= ids.back();
      }));
    };
    if (t == AgentType::Authentic) {
      REQUIRE(in_type(best) >= in_type(average));
      REQUIRE(in_type(average) >= in_type(worst));
    } else {
      REQUIRE(in_type(best) <= in_type(average));
      REQUIRE(in_type(average) <= in_type(worst));
    }
  }
}

TEST_CASE("expected jury demands an entry for every present type", "[labeling]") {
  const Population pop = Population::booster_up();
  MisclassSummary missing;
  missing.by_type[type_index(AgentType::Authentic)] = TypeMisclass{0.1, 0.0};
  REQUIRE_THROWS_AS(expected_jury(pop, missing, JuryMode::Average), std::invalid_argument);
}

TEST_CASE("jury mode names are stable", "[labeling]") {
  REQUIRE(std::string(jury_mode_name(JuryMode::Best)) == "best");
  REQUIRE(std::string(jury_mode_name(JuryMode::Average)) == "average");
  REQUIRE(std::string(jury_mode_name(JuryMode::Worst)) == "worst");
}
