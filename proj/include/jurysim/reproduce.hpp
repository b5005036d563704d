#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "jurysim/pipeline.hpp"

namespace jurysim {

// Published reference values the reproduction targets compare against.  A
// mean/SD pair of exactly 0/0 or 100/0 encodes a "perfect" cell.
namespace reference {

struct Cell {
  double mean = 0.0;
  double sd = 0.0;
};

inline constexpr std::array<const char*, 4> kPopulations = {"all", "b_up", "d_up", "l_up"};
inline constexpr std::array<const char*, 3> kNoises = {"low", "mid", "high"};

// Misclassification grid [method][row][noise][population]; row 0 = authentic
// (false positives), row 1 = inauthentic pooled (false negatives).
// Method 0 = gmm, 1 = km; populations ordered as kPopulations.
inline constexpr Cell kMisclass[2][2][3][4] = {
    {{{{0.04, 0.04}, {0.00, 0.00}, {0.00, 0.00}, {0.03, 0.05}},
      {{0.11, 0.13}, {0.00, 0.00}, {0.00, 0.008}, {0.04, 0.03}},
      {{0.50, 0.26}, {0.01, 0.02}, {0.01, 0.02}, {0.09, 0.06}}},
     {{{0.03, 0.03}, {0.13, 0.00}, {0.00, 0.00}, {0.00, 0.00}},
      {{0.04, 0.04}, {0.13, 0.00}, {0.00, 0.00}, {0.03, 0.12}},
      {{0.35, 0.17}, {0.13, 0.002}, {0.00, 0.00}, {0.81, 0.11}}}},
    {{{{0.20, 0.40}, {0.00, 0.00}, {0.00, 0.00}, {0.002, 0.006}},
      {{0.07, 0.17}, {0.01, 0.03}, {0.00, 0.01}, {0.016, 0.016}},
      {{0.31, 0.29}, {0.03, 0.004}, {0.05, 0.07}, {0.01, 0.03}}},
     {{{0.43, 0.28}, {0.13, 0.00}, {0.05, 0.06}, {0.00, 0.001}},
      {{0.48, 0.12}, {0.13, 0.003}, {0.05, 0.06}, {0.06, 0.11}},
      {{0.56, 0.16}, {0.13, 0.01}, {0.44, 0.41}, {0.97, 0.07}}}}};

// MCS grid: per population/noise/filter, the baseline plus best/average/
// worst expected-jury cells for each method.  Filter 0 = none, 1 = active.
struct McsRow {
  Cell base;
  Cell gmm[3];  // best, average, worst
  Cell km[3];
};

inline constexpr Cell kPerfect{100.00, 0.00};

inline constexpr McsRow kMcs[4][3][2] = {
    // all
    {{{{66.21, 2.18}, {kPerfect, kPerfect, {92.41, 1.27}}, {kPerfect, {82.19, 1.98}, {64.21, 2.27}}},
      {{74.83, 2.75}, {kPerfect, kPerfect, {89.84, 1.81}}, {kPerfect, {74.83, 2.75}, {74.83, 2.75}}}},
     {{{75.12, 2.08}, {kPerfect, kPerfect, kPerfect}, {{100.00, 0.02}, {97.07, 0.77}, {92.99, 1.10}}},
      {{75.41, 3.80}, {kPerfect, kPerfect, kPerfect}, {{99.99, 0.07}, {89.54, 2.80}, {78.43, 3.72}}}},
     {{{98.37, 0.45}, {kPerfect, kPerfect, {99.90, 0.14}}, {kPerfect, kPerfect, {99.95, 0.10}}},
      {{94.18, 11.34}, {kPerfect, kPerfect, {91.02, 12.79}}, {kPerfect, kPerfect, {94.92, 10.74}}}}},
    // b_up
    {{{{81.11, 1.99}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}},
      {{74.83, 2.75}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}}},
     {{{87.50, 1.39}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}},
      {{75.41, 3.80}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}}},
     {{{97.58, 0.73}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}},
      {{77.17, 21.54}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}}}},
    // d_up
    {{{{77.43, 2.18}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}},
      {{74.83, 2.75}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}}},
     {{{87.62, 1.60}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}},
      {{75.41, 3.80}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}}},
     {{{97.59, 0.73}, {kPerfect, kPerfect, kPerfect}, {kPerfect, {99.89, 0.14}, {97.59, 0.73}}},
      {{77.17, 21.54}, {kPerfect, kPerfect, kPerfect}, {kPerfect, {99.20, 3.52}, {77.17, 21.54}}}}},
    // l_up
    {{{{74.94, 2.25}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}},
      {{74.93, 2.77}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}}},
     {{{99.98, 0.07}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}},
      {{99.99, 0.07}, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}}},
     {{kPerfect, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}},
      {kPerfect, {kPerfect, kPerfect, kPerfect}, {kPerfect, kPerfect, kPerfect}}}}};

inline constexpr double kMisclassTolerance = 0.10;  // absolute, desk scale
inline constexpr double kMcsTolerance = 3.0;        // percentage points, desk scale

inline json cell_to_json(const Cell& c) { return json{{"mean", c.mean}, {"sd", c.sd}}; }

}  // namespace reference

namespace detail {

inline int scaled_runs(double scale) {
  const int runs = static_cast<int>(std::lround(100.0 * scale));
  return std::max(2, runs);
}

inline ExperimentConfig reproduce_config(std::uint64_t seed, const std::string& population,
                                         const std::string& noise, double scale) {
  ExperimentConfig config;
  config.seed = seed;
  config.population = population;
  config.noise = noise;
  config.rounds = 1000;
  config.runs = scaled_runs(scale);
  return config;
}

inline std::vector<RunData> simulate_corpus(const ExperimentConfig& config) {
  RunConfig rc;
  rc.seed = config.seed;
  rc.runs = config.runs;
  rc.rounds = config.rounds;
  rc.population = population_from_spec(config.population);
  rc.noise = noise_from_spec(config.noise);
  return run(rc);
}

// Distinct seed per (population, noise) corpus, derived from the master.
inline std::uint64_t corpus_seed(std::uint64_t seed, int pop_index, int noise_index) {
  return RandomStream(seed)
      .child(static_cast<std::uint64_t>(pop_index) + 1)
      .child(static_cast<std::uint64_t>(noise_index) + 1)
      .seed();
}

}  // namespace detail

// Misclassification comparison grid (authentic and pooled-inauthentic rates
// per population, noise, and method) against the reference values.
inline json reproduce_misclass_table(std::uint64_t seed, double scale,
                                     const std::filesystem::path& out_dir) {
  json cells = json::array();
  for (std::size_t p = 0; p < reference::kPopulations.size(); ++p) {
    for (std::size_t nz = 0; nz < reference::kNoises.size(); ++nz) {
      ExperimentConfig config = detail::reproduce_config(
          detail::corpus_seed(seed, static_cast<int>(p), static_cast<int>(nz)),
          reference::kPopulations[p], reference::kNoises[nz], scale);
      const std::vector<RunData> runs = detail::simulate_corpus(config);
      for (int m = 0; m < 2; ++m) {
        const ClusterMethod method = m == 0 ? ClusterMethod::Gmm : ClusterMethod::KMeans;
        const ClassifyOutput out = classify_runs(runs, method, config);
        const auto& auth = out.summary.by_type[0];
        const reference::Cell ref_auth = reference::kMisclass[m][0][nz][p];
        const reference::Cell ref_inauth = reference::kMisclass[m][1][nz][p];
        const double mean_auth = auth ? auth->mean : 0.0;
        cells.push_back(json{
            {"population", reference::kPopulations[p]},
            {"noise", reference::kNoises[nz]},
            {"method", method_name(method)},
            {"authentic",
             {{"mean", mean_auth},
              {"sd", auth ? auth->sd : 0.0},
              {"reference", reference::cell_to_json(ref_auth)},
              {"within_tolerance", std::abs(mean_auth - ref_auth.mean) <= reference::kMisclassTolerance}}},
            {"inauthentic",
             {{"mean", out.pooled_inauthentic.mean},
              {"sd", out.pooled_inauthentic.sd},
              {"reference", reference::cell_to_json(ref_inauth)},
              {"within_tolerance",
               std::abs(out.pooled_inauthentic.mean - ref_inauth.mean) <= reference::kMisclassTolerance}}}});
      }
    }
  }
  const json report{{"command", "reproduce"},
                    {"target", "table2"},
                    {"seed", seed},
                    {"scale", scale},
                    {"runs_per_cell", detail::scaled_runs(scale)},
                    {"tolerance", reference::kMisclassTolerance},
                    {"cells", cells}};
  std::filesystem::create_directories(out_dir);
  atomic_write_file(out_dir / "table2.json", report.dump(2) + "\n");
  return report;
}

// Baseline and expected-jury MCS grid against the reference values.
inline json reproduce_mcs_table(std::uint64_t seed, double scale,
                                const std::filesystem::path& out_dir) {
  const std::array<RoundFilter, 2> filters = {RoundFilter::none(), RoundFilter::active()};
  json cells = json::array();
  for (std::size_t p = 0; p < reference::kPopulations.size(); ++p) {
    for (std::size_t nz = 0; nz < reference::kNoises.size(); ++nz) {
      ExperimentConfig config = detail::reproduce_config(
          detail::corpus_seed(seed, static_cast<int>(p), static_cast<int>(nz)),
          reference::kPopulations[p], reference::kNoises[nz], scale);
      const std::vector<RunData> runs = detail::simulate_corpus(config);

      std::array<MisclassSummary, 2> summaries;
      for (int m = 0; m < 2; ++m) {
        const ClusterMethod method = m == 0 ? ClusterMethod::Gmm : ClusterMethod::KMeans;
        summaries[static_cast<std::size_t>(m)] = classify_runs(runs, method, config).summary;
      }

      for (std::size_t f = 0; f < filters.size(); ++f) {
        const reference::McsRow& ref = reference::kMcs[p][nz][f];
        const McsReport base = baseline_report(runs, filters[f], config.eval_rounds);
        json row{{"population", reference::kPopulations[p]},
                 {"noise", reference::kNoises[nz]},
                 {"filter", filters[f].name},
                 {"baseline",
                  {{"mean", base.mean},
                   {"sd", base.sd},
                   {"runs", base.runs},
                   {"reference", reference::cell_to_json(ref.base)},
                   {"within_tolerance", std::abs(base.mean - ref.base.mean) <= reference::kMcsTolerance}}}};
        for (int m = 0; m < 2; ++m) {
          const std::string tag = m == 0 ? "gmm" : "km";
          const auto modes = {JuryMode::Best, JuryMode::Average, JuryMode::Worst};
          int mode_index = 0;
          for (JuryMode mode : modes) {
            const McsReport rep = expected_jury_report(runs, filters[f], config.eval_rounds,
                                                       summaries[static_cast<std::size_t>(m)], mode);
            const reference::Cell ref_cell =
                m == 0 ? ref.gmm[mode_index] : ref.km[mode_index];
            row[tag + "_" + jury_mode_name(mode)] =
                json{{"mean", rep.mean},
                     {"sd", rep.sd},
                     {"runs", rep.runs},
                     {"reference", reference::cell_to_json(ref_cell)},
                     {"within_tolerance", std::abs(rep.mean - ref_cell.mean) <= reference::kMcsTolerance}};
            ++mode_index;
          }
        }
        cells.push_back(row);
      }
    }
  }
  const json report{{"command", "reproduce"},
                    {"target", "table3"},
                    {"seed", seed},
                    {"scale", scale},
                    {"runs_per_cell", detail::scaled_runs(scale)},
                    {"tolerance", reference::kMcsTolerance},
                    {"cells", cells}};
  std::filesystem::create_directories(out_dir);
  atomic_write_file(out_dir / "table3.json", report.dump(2) + "\n");
  return report;
}

// Shared sweep machinery for the two baseline-curve figures.  Both reuse one
// simulated full-population corpus per noise level and subset agents.
namespace detail {

inline const std::vector<int>& sweep_counts() {
  static const std::vector<int> counts = {1, 3, 5, 10, 25, 50, 100, 125, 225, 325, 475, 700, 1000};
  return counts;
}

inline void append_sweep_rows(std::string& csv, const std::string& curve, const std::string& noise,
                              const SweepSpec& spec, const std::vector<RunData>& corpus,
                              int eval_rounds) {
  std::vector<RunData> slices;
  slices.reserve(corpus.size());
  for (const RunData& run : corpus) slices.push_back(eval_slice(run, eval_rounds));
  for (const auto& [count, report] : baseline_sweep(spec, slices)) {
    csv += curve + "," + noise + "," + spec.filter.name + "," + std::to_string(count) + "," +
           std::to_string(report.mean) + "," + std::to_string(report.sd) + "," +
           std::to_string(report.runs) + "\n";
  }
}

inline std::array<int, kNumAgentTypes> single_type_counts(AgentType t, int count) {
  std::array<int, kNumAgentTypes> counts{};
  counts[static_cast<std::size_t>(type_index(t))] = count;
  return counts;
}

}  // namespace detail

// Authentic-count sweeps under the ACTIVE filter: the authentic-only curve,
// the three upvoting single-type curves at low noise, and the full
// inauthentic mix at every noise level.
inline json reproduce_active_sweep(std::uint64_t seed, double scale,
                                   const std::filesystem::path& out_dir) {
  std::string csv = "curve,noise,filter,authentic_count,mcs_mean,mcs_sd,runs\n";
  const ExperimentConfig base = detail::reproduce_config(seed, "full", "low", scale);

  for (std::size_t nz = 0; nz < reference::kNoises.size(); ++nz) {
    ExperimentConfig config = detail::reproduce_config(
        detail::corpus_seed(seed, 0, static_cast<int>(nz)), "full", reference::kNoises[nz], scale);
    const std::vector<RunData> corpus = detail::simulate_corpus(config);
    const std::string noise = reference::kNoises[nz];

    SweepSpec mix;
    mix.authentic_counts = detail::sweep_counts();
    for (AgentType t : kAgentTypes) {
      if (is_inauthentic(t)) mix.inauthentic_counts[static_cast<std::size_t>(type_index(t))] = 100;
    }
    mix.noise = noise_from_spec(noise);
    mix.filter = RoundFilter::active();
    detail::append_sweep_rows(csv, "mix_900", noise, mix, corpus, base.eval_rounds);

    if (noise == "low") {
      SweepSpec authentic_only = mix;
      authentic_only.inauthentic_counts = {};
      detail::append_sweep_rows(csv, "authentic_only", noise, authentic_only, corpus, base.eval_rounds);
      for (AgentType t : {AgentType::BoosterUp, AgentType::DistorterUp, AgentType::LoneWolfUp}) {
        SweepSpec single = mix;
        single.inauthentic_counts = detail::single_type_counts(t, 100);
        detail::append_sweep_rows(csv, std::string(type_tag(t)) + "_100", noise, single, corpus,
                                  base.eval_rounds);
      }
    }
  }

  std::filesystem::create_directories(out_dir);
  atomic_write_file(out_dir / "fig1.csv", csv);
  const json report{{"command", "reproduce"}, {"target", "fig1"},   {"seed", seed},
                    {"scale", scale},         {"filter", "active"}, {"csv", (out_dir / "fig1.csv").string()}};
  atomic_write_file(out_dir / "fig1.json", report.dump(2) + "\n");
  return report;
}

// Unfiltered sweeps of every single inauthentic type plus the full mix, one
// panel per noise level.
inline json reproduce_unfiltered_sweep(std::uint64_t seed, double scale,
                                       const std::filesystem::path& out_dir) {
  std::string csv = "curve,noise,filter,authentic_count,mcs_mean,mcs_sd,runs\n";
  const ExperimentConfig base = detail::reproduce_config(seed, "full", "low", scale);

  for (std::size_t nz = 0; nz < reference::kNoises.size(); ++nz) {
    ExperimentConfig config = detail::reproduce_config(
        detail::corpus_seed(seed, 0, static_cast<int>(nz)), "full", reference::kNoises[nz], scale);
    const std::vector<RunData> corpus = detail::simulate_corpus(config);
    const std::string noise = reference::kNoises[nz];

    SweepSpec spec;
    spec.authentic_counts = detail::sweep_counts();
    spec.noise = noise_from_spec(noise);
    spec.filter = RoundFilter::none();

    detail::append_sweep_rows(csv, "authentic_only", noise, spec, corpus, base.eval_rounds);
    for (AgentType t : kAgentTypes) {
      if (!is_inauthentic(t)) continue;
      SweepSpec single = spec;
      single.inauthentic_counts = detail::single_type_counts(t, 100);
      detail::append_sweep_rows(csv, std::string(type_tag(t)) + "_100", noise, single, corpus,
                                base.eval_rounds);
    }
    SweepSpec mix = spec;
    for (AgentType t : kAgentTypes) {
      if (is_inauthentic(t)) mix.inauthentic_counts[static_cast<std::size_t>(type_index(t))] = 100;
    }
    detail::append_sweep_rows(csv, "mix_900", noise, mix, corpus, base.eval_rounds);
  }

  std::filesystem::create_directories(out_dir);
  atomic_write_file(out_dir / "fig2.csv", csv);
  const json report{{"command", "reproduce"}, {"target", "fig2"}, {"seed", seed},
                    {"scale", scale},         {"filter", "none"}, {"csv", (out_dir / "fig2.csv").string()}};
  atomic_write_file(out_dir / "fig2.json", report.dump(2) + "\n");
  return report;
}

inline json cmd_reproduce(const std::string& target, std::uint64_t seed, double scale,
                          const std::filesystem::path& out_dir) {
  if (scale <= 0.0) throw std::invalid_argument("reproduce: scale must be positive");
  if (target == "table2") return reproduce_misclass_table(seed, scale, out_dir);
  if (target == "table3") return reproduce_mcs_table(seed, scale, out_dir);
  if (target == "fig1") return reproduce_active_sweep(seed, scale, out_dir);
  if (target == "fig2") return reproduce_unfiltered_sweep(seed, scale, out_dir);
  throw std::invalid_argument("reproduce: unknown target '" + target + "' (table2|table3|fig1|fig2)");
}

}  // namespace jurysim
