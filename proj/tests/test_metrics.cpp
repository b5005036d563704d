#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "jurysim/metrics.hpp"

using namespace jurysim;

namespace {

// Exhaustive brute-force MCS: re-derives the score from first principles,
// round by round, agent by agent.
double brute_mcs(const RunData& data, const Jury& jury, const RoundFilter& filter) {
  int kept = 0, correct = 0;
  for (int t = 0; t < data.rounds(); ++t) {
    if (!filter(data.props[static_cast<std::size_t>(t)])) continue;
    ++kept;
    int sum = 0;
    for (int id : jury.agents) sum += data.votes(t, id);
    const Vote verdict = sum < 0 ? kDownvote : kUpvote;
    if (verdict == data.props[static_cast<std::size_t>(t)].p1) ++correct;
  }
  return 100.0 * correct / kept;
}

AgentLabeling labeling_from(const std::vector<Label>& finals) {
  AgentLabeling l;
  l.bootstraps = 1;
  l.threshold = 1;
  l.boot_labels = {finals};
  l.final_labels = finals;
  return l;
}

}  // namespace

TEST_CASE("majority gives ties and empty juries the benefit of the doubt", "[metrics]") {
  const VoteProfile profile = {1, -1, 1, -1, 1};
  REQUIRE(majority_vote(profile, Jury{{0, 1}}) == kUpvote);       // tie
  REQUIRE(majority_vote(profile, Jury{{}}) == kUpvote);           // empty
  REQUIRE(majority_vote(profile, Jury{{1, 3, 0}}) == kDownvote);  // 2 down, 1 up
  REQUIRE(majority_vote(profile, Jury{{0, 2, 1}}) == kUpvote);
  REQUIRE(majority_vote(profile, Jury{{1}}) == kDownvote);
}

TEST_CASE("majority is invariant to jury order and +/- pair padding", "[metrics]") {
  const VoteProfile profile = {1, -1, -1, 1, 1, -1};
  Jury jury{{0, 1, 2}};
  const Vote base = majority_vote(profile, jury);
  Jury shuffled{{2, 0, 1}};
  REQUIRE(majority_vote(profile, shuffled) == base);
  // Adding one upvoter and one downvoter never changes the verdict.
  Jury padded{{0, 1, 2, 3, 5}};
  REQUIRE(majority_vote(profile, padded) == base);
}

TEST_CASE("majority rejects out-of-range jurors", "[metrics]") {
  const VoteProfile profile = {1, -1};
  REQUIRE_THROWS_AS(majority_vote(profile, Jury{{2}}), std::invalid_argument);
  REQUIRE_THROWS_AS(majority_vote(profile, Jury{{-1}}), std::invalid_argument);
}

TEST_CASE("mcs matches a brute-force oracle on small runs", "[metrics]") {
  // All juries of up to 5 agents over all subsets, several seeds, both filters.
  const Population pop = Population::from_counts({3, 1, 0, 0, 1, 0, 0, 0, 0, 0});
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const RunData data = simulate_run(pop, NoiseLevel::low(), 8, RandomStream(seed).child(0));
    for (int mask = 1; mask < 32; ++mask) {
      Jury jury;
      for (int a = 0; a < 5; ++a) {
        if (mask & (1 << a)) jury.agents.push_back(a);
      }
      for (const RoundFilter& filter : {RoundFilter::none(), RoundFilter::active()}) {
        const auto got = mcs(data, jury, filter);
        int kept = 0;
        for (const RoundProps& p : data.props) kept += filter(p) ? 1 : 0;
        if (kept == 0) {
          REQUIRE_FALSE(got.has_value());
        } else {
          REQUIRE(got.has_value());
          REQUIRE_THAT(*got, Catch::Matchers::WithinAbs(brute_mcs(data, jury, filter), 1e-12));
        }
      }
    }
  }
}

TEST_CASE("mcs is undefined when the filter keeps nothing", "[metrics]") {
  RunData data = simulate_run(Population::booster_up(), NoiseLevel::low(), 6, RandomStream(4));
  for (RoundProps& p : data.props) p.p3 = -1;
  REQUIRE_FALSE(mcs(data, Jury{{0, 1, 2}}, RoundFilter::active()).has_value());
  REQUIRE(mcs(data, Jury{{0, 1, 2}}, RoundFilter::none()).has_value());
}

TEST_CASE("aggregate_mcs computes sample statistics", "[metrics]") {
  const McsReport r = aggregate_mcs({80.0, 82.0});
  REQUIRE(r.runs == 2);
  REQUIRE_THAT(r.mean, Catch::Matchers::WithinAbs(81.0, 1e-12));
  REQUIRE_THAT(r.sd, Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-12));
  const McsReport one = aggregate_mcs({90.0});
  REQUIRE(one.runs == 1);
  REQUIRE(one.mean == 90.0);
  REQUIRE(one.sd == 0.0);
  REQUIRE(aggregate_mcs({}).runs == 0);
}

TEST_CASE("misclassification counts misses per type and pooled", "[metrics]") {
  const Population pop = Population::from_counts({2, 2, 0, 0, 0, 0, 0, 0, 0, 2});
  // Agents: A A B_up B_up L_both L_both.
  const AgentLabeling labeling = labeling_from({
      Label::Authentic, Label::Inauthentic,    // one A flagged: rate 0.5
      Label::Inauthentic, Label::Inauthentic,  // both boosters caught: rate 0
      Label::Authentic, Label::Authentic,      // both wolves missed: rate 1
  });
  const MisclassRates rates = misclassification(labeling, pop);
  REQUIRE(*rates.authentic == 0.5);
  REQUIRE(*rates.by_type[type_index(AgentType::BoosterUp)] == 0.0);
  REQUIRE(*rates.by_type[type_index(AgentType::LoneWolfBoth)] == 1.0);
  REQUIRE_FALSE(rates.by_type[type_index(AgentType::DistorterUp)].has_value());
  REQUIRE(*rates.inauthentic == 0.5);  // 2 of 4 inauthentic agents missed
}

TEST_CASE("misclassification requires matching sizes", "[metrics]") {
  const Population pop = Population::booster_up();
  const AgentLabeling labeling = labeling_from({Label::Authentic});
  REQUIRE_THROWS_AS(misclassification(labeling, pop), std::invalid_argument);
}

TEST_CASE("perfect labels mean zero misclassification", "[metrics]") {
  const Population pop = Population::from_counts({3, 0, 0, 2, 0, 0, 0, 0, 0, 0});
  const AgentLabeling labeling = labeling_from({
      Label::Authentic, Label::Authentic, Label::Authentic,
      Label::Inauthentic, Label::Inauthentic,
  });
  const MisclassRates rates = misclassification(labeling, pop);
  REQUIRE(*rates.authentic == 0.0);
  REQUIRE(*rates.inauthentic == 0.0);
}

TEST_CASE("summaries aggregate across runs with sample statistics", "[metrics]") {
  MisclassRates a, b;
  a.by_type[0] = 0.2;
  b.by_type[0] = 0.4;
  a.by_type[1] = 0.0;
  b.by_type[1] = 0.0;
  a.inauthentic = 0.1;
  b.inauthentic = 0.3;
  const MisclassSummary summary = summarize_misclassification({a, b});
  REQUIRE_THAT(summary.by_type[0]->mean, Catch::Matchers::WithinAbs(0.3, 1e-12));
  REQUIRE_THAT(summary.by_type[0]->sd,
               Catch::Matchers::WithinAbs(std::sqrt(0.02), 1e-12));
  REQUIRE(summary.by_type[1]->mean == 0.0);
  REQUIRE(summary.by_type[1]->sd == 0.0);
  REQUIRE_FALSE(summary.by_type[2].has_value());
  const TypeMisclass pooled = summarize_pooled_inauthentic({a, b});
  REQUIRE_THAT(pooled.mean, Catch::Matchers::WithinAbs(0.2, 1e-12));
  REQUIRE_THAT(pooled.sd, Catch::Matchers::WithinAbs(std::sqrt(0.02), 1e-12));
}

TEST_CASE("baseline sweep grows the authentic block over a fixed opposition", "[metrics]") {
  RunConfig config;
  config.seed = 99;
  config.runs = 4;
  config.rounds = 200;
  config.population = Population::pair(AgentType::BoosterUp, 50, 10);
  config.noise = NoiseLevel::low();
  const std::vector<RunData> corpus = run(config);

  SweepSpec spec;
  spec.authentic_counts = {1, 5, 25};
  spec.inauthentic_counts[type_index(AgentType::BoosterUp)] = 10;
  spec.filter = RoundFilter::none();
  const auto table = baseline_sweep(spec, corpus);
  REQUIRE(table.size() == 3);
  REQUIRE(table[0].first == 1);
  REQUIRE(table[2].first == 25);
  for (const auto& [m, report] : table) {
    REQUIRE(report.runs == 4);
    REQUIRE(report.jury == "A=" + std::to_string(m));
    REQUIRE(report.filter == "none");
    REQUIRE(report.mean >= 0.0);
    REQUIRE(report.mean <= 100.0);
  }
  // More honest voters should help against a fixed opposition.
  REQUIRE(table[2].second.mean > table[0].second.mean);

  // Cross-check one cell against direct mcs calls.
  Jury jury;
  for (int i = 0; i < 10; ++i) jury.agents.push_back(50 + i);  // boosters
  for (int i = 0; i < 5; ++i) jury.agents.push_back(i);        // authentic block
  std::sort(jury.agents.begin(), jury.agents.end());
  std::vector<double> values;
  for (const RunData& r : corpus) values.push_back(*mcs(r, jury, spec.filter));
  const McsReport direct = aggregate_mcs(values);
  REQUIRE_THAT(table[1].second.mean, Catch::Matchers::WithinAbs(direct.mean, 1e-12));
  REQUIRE_THAT(table[1].second.sd, Catch::Matchers::WithinAbs(direct.sd, 1e-12));
}

TEST_CASE("baseline sweep validates counts against the corpus", "[metrics]") {
  RunConfig config;
  config.seed = 1;
  config.runs = 1;
  config.rounds = 10;
  config.population = Population::pair(AgentType::BoosterUp, 5, 5);
  const std::vector<RunData> corpus = run(config);

  SweepSpec over;
  over.authentic_counts = {6};
  REQUIRE_THROWS_AS(baseline_sweep(over, corpus), std::invalid_argument);

  SweepSpec bad_type;
  bad_type.authentic_counts = {2};
  bad_type.inauthentic_counts[type_index(AgentType::DistorterUp)] = 1;
  REQUIRE_THROWS_AS(baseline_sweep(bad_type, corpus), std::invalid_argument);

  SweepSpec not_ascending;
  not_ascending.authentic_counts = {3, 2};
  REQUIRE_THROWS_AS(not_ascending.validate(), std::invalid_argument);

  SweepSpec fixed_authentic;
  fixed_authentic.authentic_counts = {1};
  fixed_authentic.inauthentic_counts[0] = 1;
  REQUIRE_THROWS_AS(fixed_authentic.validate(), std::invalid_argument);

  REQUIRE_THROWS_AS(baseline_sweep(SweepSpec{{1}}, {}), std::invalid_argument);
}
