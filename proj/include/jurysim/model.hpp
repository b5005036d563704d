#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jurysim/random.hpp"

namespace jurysim {

using Vote = std::int8_t;  // +1 upvote, -1 downvote
inline constexpr Vote kUpvote = 1;
inline constexpr Vote kDownvote = -1;

// One authentic type plus nine inauthentic strategies.  Boosters key their
// deviation off the polarizing property p2, distorters off the divisive
// property p3, and lone wolves replay the distorter strategies against a
// personal property of their own instead of the shared p3.
enum class AgentType : std::uint8_t {
  Authentic,
  BoosterUp,
  BoosterDown,
  BoosterBoth,
  DistorterUp,
  DistorterDown,
  DistorterBoth,
  LoneWolfUp,
  LoneWolfDown,
  LoneWolfBoth,
};

inline constexpr int kNumAgentTypes = 10;

inline constexpr std::array<AgentType, kNumAgentTypes> kAgentTypes = {
    AgentType::Authentic,    AgentType::BoosterUp,    AgentType::BoosterDown,
    AgentType::BoosterBoth,  AgentType::DistorterUp,  AgentType::DistorterDown,
    AgentType::DistorterBoth, AgentType::LoneWolfUp,  AgentType::LoneWolfDown,
    AgentType::LoneWolfBoth,
};

constexpr int type_index(AgentType t) { return static_cast<int>(t); }

constexpr bool is_lone_wolf(AgentType t) {
  return t == AgentType::LoneWolfUp || t == AgentType::LoneWolfDown ||
         t == AgentType::LoneWolfBoth;
}

constexpr bool is_inauthentic(AgentType t) { return t != AgentType::Authentic; }

inline constexpr std::array<std::string_view, kNumAgentTypes> kTypeTags = {
    "A",    "B_up", "B_down", "B_both", "D_up",
    "D_down", "D_both", "L_up", "L_down", "L_both",
};

inline std::string_view type_tag(AgentType t) { return kTypeTags[type_index(t)]; }

inline std::optional<AgentType> type_from_tag(std::string_view tag) {
  for (int i = 0; i < kNumAgentTypes; ++i) {
    if (kTypeTags[i] == tag) return kAgentTypes[static_cast<std::size_t>(i)];
  }
  return std::nullopt;
}

// Per-round sampling accuracies for the three post properties.
struct NoiseLevel {
  double prob_p1 = 0.75;  // P(p1 = +1): chance the post is high quality
  double prob_p2 = 0.75;  // P(p2 = +1): chance the post is polarizing
  double prob_p3 = 0.9;   // P(p3 = +1): chance the post is divisive

  static constexpr NoiseLevel low() { return {0.75, 0.75, 0.9}; }
  static constexpr NoiseLevel mid() { return {0.75, 0.5, 0.5}; }
  static constexpr NoiseLevel high() { return {0.75, 0.1, 0.1}; }

  void validate() const {
    for (double p : {prob_p1, prob_p2, prob_p3}) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("NoiseLevel: probabilities must lie in [0, 1]");
      }
    }
  }
};

inline std::optional<NoiseLevel> noise_from_name(std::string_view name) {
  if (name == "low") return NoiseLevel::low();
  if (name == "mid") return NoiseLevel::mid();
  if (name == "high") return NoiseLevel::high();
  return std::nullopt;
}

// Fixed agent roster: contiguous blocks in canonical type order, so agent ids
// are stable across runs and expected juries can address "the first m of type
// X" deterministically.
class Population {
 public:
  Population() = default;

  static Population from_counts(const std::array<int, kNumAgentTypes>& counts) {
    Population pop;
    pop.counts_ = counts;
    int n = 0;
    for (int c : counts) {
      if (c < 0) throw std::invalid_argument("Population: negative type count");
      n += c;
    }
    if (n == 0) throw std::invalid_argument("Population: empty population");
    pop.types_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < kNumAgentTypes; ++i) {
      pop.types_.insert(pop.types_.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(i)]),
                        kAgentTypes[static_cast<std::size_t>(i)]);
    }
    return pop;
  }

  // 1000 authentic agents plus 100 of each inauthentic type.
  static Population full() {
    std::array<int, kNumAgentTypes> c{};
    c.fill(100);
    c[0] = 1000;
    return from_counts(c);
  }

  // 100 agents of every type.
  static Population all() {
    std::array<int, kNumAgentTypes> c{};
    c.fill(100);
    return from_counts(c);
  }

  // 100 authentic agents plus 100 of a single inauthentic type.
  static Population pair(AgentType inauthentic, int authentic = 100, int other = 100) {
    if (!is_inauthentic(inauthentic)) {
      throw std::invalid_argument("Population::pair: second block must be inauthentic");
    }
    std::array<int, kNumAgentTypes> c{};
    c[0] = authentic;
    c[static_cast<std::size_t>(type_index(inauthentic))] = other;
    return from_counts(c);
  }

  static Population booster_up() { return pair(AgentType::BoosterUp); }
  static Population distorter_up() { return pair(AgentType::DistorterUp); }
  static Population lone_wolf_up() { return pair(AgentType::LoneWolfUp); }

  int size() const { return static_cast<int>(types_.size()); }

  AgentType type_of(int agent) const { return types_[static_cast<std::size_t>(agent)]; }

  const std::vector<AgentType>& types() const { return types_; }

  const std::array<int, kNumAgentTypes>& counts() const { return counts_; }

  int count(AgentType t) const { return counts_[static_cast<std::size_t>(type_index(t))]; }

  bool has_type(AgentType t) const { return count(t) > 0; }

  // Agent ids of a type in roster order (they are contiguous by construction).
  std::vector<int> agents_of_type(AgentType t) const {
    std::vector<int> ids;
    ids.reserve(static_cast<std::size_t>(count(t)));
    for (int a = 0; a < size(); ++a) {
      if (types_[static_cast<std::size_t>(a)] == t) ids.push_back(a);
    }
    return ids;
  }

 private:
  std::vector<AgentType> types_;
  std::array<int, kNumAgentTypes> counts_{};
};

// Agents judge post quality with competence drawn fresh each round; the
// orthogonal properties are read perfectly.
struct CompetenceInterval {
  double lo = 0.65;
  double hi = 0.95;

  void validate() const {
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) {
      throw std::invalid_argument("CompetenceInterval: need 0 <= lo <= hi <= 1");
    }
  }
};

// Everything sampled for one voting round: the post's properties and every
// agent's private beliefs about them.
struct RoundState {
  std::int8_t p1 = 1;  // quality: +1 high, -1 low
  std::int8_t p2 = 1;  // polarizing?
  std::int8_t p3 = 1;  // divisive?
  std::vector<double> competence;        // per-agent P(belief about p1 is right)
  std::vector<std::int8_t> belief_p1;
  std::vector<std::int8_t> belief_p2;
  std::vector<std::int8_t> belief_p3;
  std::vector<std::int8_t> personal;     // lone wolves' own property; 0 elsewhere
};

// Samples one round.  `round_rng` must be a stream dedicated to this round:
// the post's properties come from the stream itself while every agent reads
// from child(agent_id), so one agent's draws never shift another's.
inline RoundState sample_round_state(const Population& pop, const NoiseLevel& noise,
                                     const RandomStream& round_rng,
                                     const CompetenceInterval& competence = {}) {
  noise.validate();
  competence.validate();

  const int n = pop.size();
  RoundState s;
  RandomStream props = round_rng.child(0x706f7374ULL);  // "post"
  s.p1 = props.sign(noise.prob_p1);
  s.p2 = props.sign(noise.prob_p2);
  s.p3 = props.sign(noise.prob_p3);

  s.competence.resize(static_cast<std::size_t>(n));
  s.belief_p1.resize(static_cast<std::size_t>(n));
  s.belief_p2.resize(static_cast<std::size_t>(n));
  s.belief_p3.resize(static_cast<std::size_t>(n));
  s.personal.assign(static_cast<std::size_t>(n), 0);

  for (int a = 0; a < n; ++a) {
    RandomStream agent = round_rng.child(static_cast<std::uint64_t>(a) + 1);
    const auto ai = static_cast<std::size_t>(a);
    const double c = agent.uniform(competence.lo, competence.hi);
    s.competence[ai] = c;
    s.belief_p1[ai] = agent.bernoulli(c) ? s.p1 : static_cast<std::int8_t>(-s.p1);
    // The orthogonal properties are observed without error.
    s.belief_p2[ai] = s.p2;
    s.belief_p3[ai] = s.p3;
    if (is_lone_wolf(pop.type_of(a))) {
      // A personal property, distributed like p3 but sampled independently
      // per wolf; the wolf reads it perfectly.
      s.personal[ai] = agent.sign(noise.prob_p3);
    }
  }
  return s;
}

// The authentic vote: report the quality belief.
inline Vote authentic_vote(int agent, const RoundState& s) {
  return s.belief_p1[static_cast<std::size_t>(agent)];
}

// Type strategy tables.  Boosters override their authentic vote on one side
// of p2; distorters invert it when they believe the post is divisive (on one
// side of p1); lone wolves run the distorter tables against their personal
// property.
inline Vote decide_vote(AgentType type, int agent, const RoundState& s) {
  const auto ai = static_cast<std::size_t>(agent);
  const Vote honest = s.belief_p1[ai];
  const std::int8_t b2 = s.belief_p2[ai];
  const std::int8_t b3 = s.belief_p3[ai];
  switch (type) {
    case AgentType::Authentic:
      return honest;
    case AgentType::BoosterUp:
      return b2 == 1 ? kUpvote : honest;
    case AgentType::BoosterDown:
      return b2 == 1 ? honest : kDownvote;
    case AgentType::BoosterBoth:
      return b2 == 1 ? kUpvote : kDownvote;
    case AgentType::DistorterUp:
      return (b3 == 1 && honest == -1) ? static_cast<Vote>(-honest) : honest;
    case AgentType::DistorterDown:
      return (b3 == 1 && honest == 1) ? static_cast<Vote>(-honest) : honest;
    case AgentType::DistorterBoth:
      return b3 == 1 ? static_cast<Vote>(-honest) : honest;
    case AgentType::LoneWolfUp:
    case AgentType::LoneWolfDown:
    case AgentType::LoneWolfBoth: {
      const std::int8_t pa = s.personal[ai];
      if (pa == 0) throw std::logic_error("decide_vote: lone wolf without personal property");
      if (type == AgentType::LoneWolfUp) {
        return (pa == 1 && honest == -1) ? static_cast<Vote>(-honest) : honest;
      }
      if (type == AgentType::LoneWolfDown) {
        return (pa == 1 && honest == 1) ? static_cast<Vote>(-honest) : honest;
      }
      return pa == 1 ? static_cast<Vote>(-honest) : honest;
    }
  }
  throw std::logic_error("decide_vote: unknown agent type");
}

}  // namespace jurysim
