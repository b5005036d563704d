#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jurysim/engine.hpp"
#include "jurysim/labeling.hpp"

namespace jurysim {

using VoteProfile = std::vector<Vote>;

namespace detail {

inline void check_jury(const Jury& jury, int population_size) {
  for (int id : jury.agents) {
    if (id < 0 || id >= population_size) {
      throw std::invalid_argument("jury references an agent outside the population");
    }
  }
}

}  // namespace detail

// Majority with the benefit of the doubt: only a strictly negative vote sum
// rejects the post, so ties and empty juries resolve to +1.
inline Vote majority_vote(const VoteProfile& profile, const Jury& jury) {
  detail::check_jury(jury, static_cast<int>(profile.size()));
  long long sum = 0;
  for (int id : jury.agents) sum += profile[static_cast<std::size_t>(id)];
  return sum < 0 ? kDownvote : kUpvote;
}

// Majority correctness score: percentage of filtered rounds where the jury's
// majority matches the post's true quality.  Undefined (nullopt) when the
// filter leaves no rounds -- deliberately distinct from 0.
inline std::optional<double> mcs(const RunData& data, const Jury& jury, const RoundFilter& filter = {}) {
  detail::check_jury(jury, data.agents());
  Eigen::VectorXi sums = Eigen::VectorXi::Zero(data.rounds());
  for (int id : jury.agents) sums += data.votes.col(id).cast<int>();
  int kept = 0, correct = 0;
  for (int t = 0; t < data.rounds(); ++t) {
    const RoundProps& props = data.props[static_cast<std::size_t>(t)];
    if (!filter(props)) continue;
    ++kept;
    const Vote verdict = sums(t) < 0 ? kDownvote : kUpvote;
    if (verdict == props.p1) ++correct;
  }
  if (kept == 0) return std::nullopt;
  return 100.0 * correct / kept;
}

struct McsReport {
  double mean = 0.0;
  double sd = 0.0;
  int runs = 0;
  std::string jury;    // description of the jury rule evaluated
  std::string filter;  // round filter name
};

// Sample mean and SD across per-run MCS values.
inline McsReport aggregate_mcs(const std::vector<double>& values) {
  McsReport report;
  report.runs = static_cast<int>(values.size());
  if (values.empty()) return report;
  double sum = 0.0;
  for (double v : values) sum += v;
  report.mean = sum / report.runs;
  if (report.runs > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - report.mean) * (v - report.mean);
    report.sd = std::sqrt(ss / (report.runs - 1));
  }
  return report;
}

// Per-type misclassification of one run's final labels: the authentic type's
// rate counts false inauthentic calls, each inauthentic type's rate counts
// missed detections (agents passed off as authentic).
struct MisclassRates {
  std::array<std::optional<double>, kNumAgentTypes> by_type;
  std::optional<double> authentic;    // alias of the authentic entry
  std::optional<double> inauthentic;  // pooled over all inauthentic agents
};

inline MisclassRates misclassification(const AgentLabeling& labeling, const Population& pop) {
  if (labeling.agents() != pop.size()) {
    throw std::invalid_argument("misclassification: labeling does not cover the population");
  }
  std::array<int, kNumAgentTypes> wrong{};
  for (int a = 0; a < pop.size(); ++a) {
    const AgentType t = pop.type_of(a);
    const Label l = labeling.final_labels[static_cast<std::size_t>(a)];
    const bool miss = t == AgentType::Authentic ? l == Label::Inauthentic : l == Label::Authentic;
    if (miss) wrong[static_cast<std::size_t>(type_index(t))]++;
  }
  MisclassRates rates;
  int in_total = 0, in_wrong = 0;
  for (AgentType t : kAgentTypes) {
    const auto i = static_cast<std::size_t>(type_index(t));
    const int c = pop.count(t);
    if (c == 0) continue;
    rates.by_type[i] = static_cast<double>(wrong[i]) / c;
    if (is_inauthentic(t)) {
      in_total += c;
      in_wrong += wrong[i];
    }
  }
  rates.authentic = rates.by_type[0];
  if (in_total > 0) rates.inauthentic = static_cast<double>(in_wrong) / in_total;
  return rates;
}

// Mean/SD of each type's misclassification across runs.
inline MisclassSummary summarize_misclassification(const std::vector<MisclassRates>& runs) {
  MisclassSummary summary;
  for (int i = 0; i < kNumAgentTypes; ++i) {
    std::vector<double> values;
    for (const MisclassRates& r : runs) {
      if (r.by_type[static_cast<std::size_t>(i)]) {
        values.push_back(*r.by_type[static_cast<std::size_t>(i)]);
      }
    }
    if (values.empty()) continue;
    double sum = 0.0;
    for (double v : values) sum += v;
    TypeMisclass tm;
    tm.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - tm.mean) * (v - tm.mean);
      tm.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    summary.by_type[static_cast<std::size_t>(i)] = tm;
  }
  return summary;
}

// Pooled mean/SD across all inauthentic agents, aggregated the same way.
inline TypeMisclass summarize_pooled_inauthentic(const std::vector<MisclassRates>& runs) {
  std::vector<double> values;
  for (const MisclassRates& r : runs) {
    if (r.inauthentic) values.push_back(*r.inauthentic);
  }
  TypeMisclass tm;
  if (values.empty()) return tm;
  double sum = 0.0;
  for (double v : values) sum += v;
  tm.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - tm.mean) * (v - tm.mean);
    tm.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return tm;
}

// Baseline sweep: juries of growing authentic blocks against a fixed
// inauthentic composition, evaluated on a shared corpus.
struct SweepSpec {
  std::vector<int> authentic_counts;                    // positive, ascending
  std::array<int, kNumAgentTypes> inauthentic_counts{};  // [0] must stay 0
  NoiseLevel noise;  // descriptive; the corpus fixes the actual noise
  RoundFilter filter;

  void validate() const {
    if (authentic_counts.empty()) throw std::invalid_argument("SweepSpec: no authentic counts");
    int prev = 0;
    for (int c : authentic_counts) {
      if (c <= prev) throw std::invalid_argument("SweepSpec: counts must be positive ascending");
      prev = c;
    }
    if (inauthentic_counts[0] != 0) {
      throw std::invalid_argument("SweepSpec: authentic agents are swept, not fixed");
    }
  }
};

inline std::vector<std::pair<int, McsReport>> baseline_sweep(const SweepSpec& spec,
                                                             const std::vector<RunData>& corpus) {
  spec.validate();
  if (corpus.empty()) throw std::invalid_argument("baseline_sweep: empty corpus");
  const Population& pop = corpus.front().population;
  if (spec.authentic_counts.back() > pop.count(AgentType::Authentic)) {
    throw std::invalid_argument("baseline_sweep: authentic count exceeds the corpus population");
  }
  for (AgentType t : kAgentTypes) {
    const auto i = static_cast<std::size_t>(type_index(t));
    if (spec.inauthentic_counts[i] > pop.count(t)) {
      throw std::invalid_argument("baseline_sweep: inauthentic count exceeds the corpus population");
    }
  }

  Jury fixed;
  for (AgentType t : kAgentTypes) {
    if (t == AgentType::Authentic) continue;
    const int c = spec.inauthentic_counts[static_cast<std::size_t>(type_index(t))];
    const std::vector<int> ids = pop.agents_of_type(t);
    for (int i = 0; i < c; ++i) fixed.agents.push_back(ids[static_cast<std::size_t>(i)]);
  }
  const std::vector<int> authentic_ids = pop.agents_of_type(AgentType::Authentic);

  std::vector<std::pair<int, McsReport>> table;
  for (int m : spec.authentic_counts) {
    Jury jury = fixed;
    for (int i = 0; i < m; ++i) jury.agents.push_back(authentic_ids[static_cast<std::size_t>(i)]);
    std::sort(jury.agents.begin(), jury.agents.end());
    std::vector<double> values;
    for (const RunData& run : corpus) {
      if (const auto v = mcs(run, jury, spec.filter)) values.push_back(*v);
    }
    McsReport report = aggregate_mcs(values);
    report.jury = "A=" + std::to_string(m);
    report.filter = spec.filter.name;
    table.emplace_back(m, report);
  }
  return table;
}

}  // namespace jurysim
