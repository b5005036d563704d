#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "jurysim/model.hpp"
#include "jurysim/random.hpp"

namespace jurysim {

// rounds x agents table of +/-1 votes.
using VoteMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Ground-truth properties of the post voted on in one round.
struct RoundProps {
  std::int8_t p1 = 1;
  std::int8_t p2 = 1;
  std::int8_t p3 = 1;
};

// One simulated run: the vote table plus the per-round ground truth needed to
// score juries and fit classifiers.
struct RunData {
  VoteMatrix votes;               // rounds x agents
  std::vector<RoundProps> props;  // size == rounds
  Population population;
  NoiseLevel noise;
  std::uint64_t seed = 0;  // seed of the stream this run was drawn from

  int rounds() const { return static_cast<int>(votes.rows()); }
  int agents() const { return static_cast<int>(votes.cols()); }
};

struct RunConfig {
  std::uint64_t seed = 0;
  int runs = 1;
  int rounds = 500;
  Population population;
  NoiseLevel noise;
  CompetenceInterval competence;

  void validate() const {
    if (runs < 1) throw std::invalid_argument("RunConfig: runs must be >= 1");
    if (rounds < 1) throw std::invalid_argument("RunConfig: rounds must be >= 1");
    if (population.size() == 0) throw std::invalid_argument("RunConfig: empty population");
    noise.validate();
    competence.validate();
  }
};

// Simulates one run off a dedicated stream.  Round t draws from child(t), so
// a truncated simulation produces a bit-identical prefix of a longer one.
inline RunData simulate_run(const Population& pop, const NoiseLevel& noise, int rounds,
                            const RandomStream& run_rng,
                            const CompetenceInterval& competence = {}) {
  if (rounds < 1) throw std::invalid_argument("simulate_run: rounds must be >= 1");
  RunData data;
  data.population = pop;
  data.noise = noise;
  data.seed = run_rng.seed();
  data.votes.resize(rounds, pop.size());
  data.props.resize(static_cast<std::size_t>(rounds));
  for (int t = 0; t < rounds; ++t) {
    const RoundState s = sample_round_state(pop, noise, run_rng.child(static_cast<std::uint64_t>(t)),
                                            competence);
    data.props[static_cast<std::size_t>(t)] = {s.p1, s.p2, s.p3};
    for (int a = 0; a < pop.size(); ++a) {
      data.votes(t, a) = decide_vote(pop.type_of(a), a, s);
    }
  }
  return data;
}

// Simulates config.runs independent runs; run i draws from child(i) of the
// master stream.
inline std::vector<RunData> run(const RunConfig& config) {
  config.validate();
  const RandomStream master(config.seed);
  std::vector<RunData> out;
  out.reserve(static_cast<std::size_t>(config.runs));
  for (int i = 0; i < config.runs; ++i) {
    out.push_back(simulate_run(config.population, config.noise, config.rounds,
                               master.child(static_cast<std::uint64_t>(i)), config.competence));
  }
  return out;
}

// First r rounds of a run.
inline RunData take_rounds(const RunData& data, int r) {
  if (r < 1 || r > data.rounds()) {
    throw std::invalid_argument("take_rounds: need 1 <= r <= rounds");
  }
  RunData out;
  out.votes = data.votes.topRows(r);
  out.props.assign(data.props.begin(), data.props.begin() + r);
  out.population = data.population;
  out.noise = data.noise;
  out.seed = data.seed;
  return out;
}

// Resamples rounds with replacement (properties travel with their rows).
inline RunData bootstrap_rounds(const RunData& data, RandomStream& rng) {
  const int r = data.rounds();
  RunData out;
  out.votes.resize(r, data.agents());
  out.props.resize(static_cast<std::size_t>(r));
  out.population = data.population;
  out.noise = data.noise;
  out.seed = data.seed;
  for (int t = 0; t < r; ++t) {
    const auto src = static_cast<int>(rng.below(static_cast<std::uint64_t>(r)));
    out.votes.row(t) = data.votes.row(src);
    out.props[static_cast<std::size_t>(t)] = data.props[static_cast<std::size_t>(src)];
  }
  return out;
}

// Round predicate on ground-truth properties, used to score juries on the
// subset of rounds where manipulation is actually in play.
struct RoundFilter {
  std::string name = "none";
  std::function<bool(const RoundProps&)> keep;  // empty => keep everything

  static RoundFilter none() { return {}; }

  // Rounds that are both polarizing and divisive.
  static RoundFilter active() {
    return {"active", [](const RoundProps& p) { return p.p2 == 1 && p.p3 == 1; }};
  }

  bool operator()(const RoundProps& p) const { return !keep || keep(p); }
};

inline RoundFilter filter_from_name(std::string_view name) {
  if (name == "none") return RoundFilter::none();
  if (name == "active") return RoundFilter::active();
  throw std::invalid_argument("unknown round filter: " + std::string(name));
}

// Rows of a run passing the filter; may be empty.
inline RunData filter_rounds(const RunData& data, const RoundFilter& filter) {
  std::vector<int> keep;
  for (int t = 0; t < data.rounds(); ++t) {
    if (filter(data.props[static_cast<std::size_t>(t)])) keep.push_back(t);
  }
  RunData out;
  out.votes.resize(static_cast<int>(keep.size()), data.agents());
  out.props.resize(keep.size());
  out.population = data.population;
  out.noise = data.noise;
  out.seed = data.seed;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.votes.row(static_cast<int>(i)) = data.votes.row(keep[i]);
    out.props[i] = data.props[static_cast<std::size_t>(keep[i])];
  }
  return out;
}

}  // namespace jurysim
