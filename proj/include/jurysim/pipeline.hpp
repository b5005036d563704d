#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jurysim/engine.hpp"
#include "jurysim/io.hpp"
#include "jurysim/labeling.hpp"
#include "jurysim/metrics.hpp"

namespace jurysim {

// One knob set shared by every command; defaults match the reference
// experiment setup (100 runs of 1000 rounds on the full population, low
// noise, both clustering methods, 4-of-5 bootstrap aggregation).
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string population = "full";
  std::string noise = "low";
  int rounds = 1000;
  int runs = 100;
  std::string method = "both";  // gmm | km | both
  int bootstraps = 5;
  int threshold = 4;
  std::string filter = "none";  // none | active
  int q = 2;
  int k_lo = 2;
  int k_hi = 20;
  int eval_rounds = 0;  // rounds used by classify/evaluate; 0 = min(500, available)
};

inline Population population_from_spec(const std::string& spec) {
  if (spec == "full") return Population::full();
  if (spec == "all") return Population::all();
  if (spec == "b_up") return Population::booster_up();
  if (spec == "d_up") return Population::distorter_up();
  if (spec == "l_up") return Population::lone_wolf_up();
  // Explicit counts: "A=100,B_up=100,...".
  std::array<int, kNumAgentTypes> counts{};
  std::stringstream ss(spec);
  std::string item;
  bool any = false;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("population spec: expected TYPE=COUNT, got '" + item + "'");
    }
    const auto type = type_from_tag(item.substr(0, eq));
    if (!type) throw std::invalid_argument("population spec: unknown type '" + item.substr(0, eq) + "'");
    counts[static_cast<std::size_t>(type_index(*type))] = std::stoi(item.substr(eq + 1));
    any = true;
  }
  if (!any) throw std::invalid_argument("population spec: empty");
  return Population::from_counts(counts);
}

inline NoiseLevel noise_from_spec(const std::string& spec) {
  if (const auto preset = noise_from_name(spec)) return *preset;
  // Explicit probabilities: "0.75,0.5,0.5".
  std::stringstream ss(spec);
  std::string item;
  std::vector<double> probs;
  while (std::getline(ss, item, ',')) probs.push_back(std::stod(item));
  if (probs.size() != 3) {
    throw std::invalid_argument("noise spec: expected low|mid|high or three probabilities");
  }
  NoiseLevel noise{probs[0], probs[1], probs[2]};
  noise.validate();
  return noise;
}

inline std::vector<ClusterMethod> methods_from_spec(const std::string& spec) {
  if (spec == "gmm") return {ClusterMethod::Gmm};
  if (spec == "km") return {ClusterMethod::KMeans};
  if (spec == "both") return {ClusterMethod::Gmm, ClusterMethod::KMeans};
  throw std::invalid_argument("method: expected gmm|km|both");
}

inline ClassifyOptions classify_options(const ExperimentConfig& config) {
  ClassifyOptions opts;
  opts.bootstraps = config.bootstraps;
  opts.threshold = config.threshold;
  opts.q = config.q;
  opts.k_range = {config.k_lo, config.k_hi};
  opts.validate();
  return opts;
}

inline json config_to_json(const ExperimentConfig& config) {
  return json{{"seed", config.seed},
              {"population", config.population},
              {"noise", config.noise},
              {"rounds", config.rounds},
              {"runs", config.runs},
              {"method", config.method},
              {"bootstraps", config.bootstraps},
              {"threshold", config.threshold},
              {"filter", config.filter},
              {"q", config.q},
              {"k_range", {config.k_lo, config.k_hi}},
              {"eval_rounds", config.eval_rounds}};
}

// Evaluation and classification run on the first eval_rounds rounds; the
// default (0) takes the standard 500-round subset when available.
inline RunData eval_slice(const RunData& data, int eval_rounds) {
  if (eval_rounds == 0) {
    const int r = std::min(500, data.rounds());
    return r == data.rounds() ? data : take_rounds(data, r);
  }
  return eval_rounds == data.rounds() ? data : take_rounds(data, eval_rounds);
}

// -- simulate ---------------------------------------------------------------

inline json cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  RunConfig rc;
  rc.seed = config.seed;
  rc.runs = config.runs;
  rc.rounds = config.rounds;
  rc.population = population_from_spec(config.population);
  rc.noise = noise_from_spec(config.noise);
  const std::vector<RunData> runs = run(rc);
  write_dataset(out_dir, runs, config.seed);
  return json{{"command", "simulate"},
              {"config", config_to_json(config)},
              {"dir", out_dir.string()},
              {"runs", static_cast<int>(runs.size())},
              {"rounds", rc.rounds},
              {"agents", rc.population.size()}};
}

// -- classify ---------------------------------------------------------------

// Seed hierarchy for classification: per-method substream of the master,
// then one child per run, so runs and methods never share draws.
inline RandomStream classify_stream(std::uint64_t seed, ClusterMethod method, int run_index) {
  const RandomStream master(seed);
  const std::uint64_t method_tag = method == ClusterMethod::Gmm ? 0x676d6dULL : 0x6b6dULL;
  return master.child(method_tag).child(static_cast<std::uint64_t>(run_index));
}

struct ClassifyOutput {
  ClusterMethod method = ClusterMethod::Gmm;
  std::vector<AgentLabeling> labelings;   // per run
  std::vector<MisclassRates> rates;       // per run
  MisclassSummary summary;                // per-type mean/sd across runs
  TypeMisclass pooled_inauthentic;        // pooled across inauthentic agents
};

inline ClassifyOutput classify_runs(const std::vector<RunData>& runs, ClusterMethod method,
                                    const ExperimentConfig& config) {
  const ClassifyOptions opts = classify_options(config);
  ClassifyOutput out;
  out.method = method;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunData slice = eval_slice(runs[i], config.eval_rounds);
    AgentLabeling labeling =
        classify_agents(slice, method, classify_stream(config.seed, method, static_cast<int>(i)), opts);
    out.rates.push_back(misclassification(labeling, slice.population));
    out.labelings.push_back(std::move(labeling));
  }
  out.summary = summarize_misclassification(out.rates);
  out.pooled_inauthentic = summarize_pooled_inauthentic(out.rates);
  return out;
}

inline json misclass_rates_to_json(const MisclassRates& rates) {
  json per_type = json::object();
  for (AgentType t : kAgentTypes) {
    const auto& v = rates.by_type[static_cast<std::size_t>(type_index(t))];
    if (v) per_type[std::string(type_tag(t))] = *v;
  }
  json j{{"per_type", per_type}};
  if (rates.authentic) j["authentic"] = *rates.authentic;
  if (rates.inauthentic) j["inauthentic"] = *rates.inauthentic;
  return j;
}

inline json classify_output_to_json(const ClassifyOutput& out, const ExperimentConfig& config) {
  json per_run = json::array();
  for (std::size_t i = 0; i < out.rates.size(); ++i) {
    per_run.push_back(json{{"run_index", static_cast<int>(i)},
                           {"rates", misclass_rates_to_json(out.rates[i])}});
  }
  return json{{"command", "classify"},
              {"config", config_to_json(config)},
              {"method", method_name(out.method)},
              {"per_run", per_run},
              {"summary",
               {{"per_type", misclass_summary_to_json(out.summary)},
                {"inauthentic_pooled", type_misclass_to_json(out.pooled_inauthentic)}}}};
}

inline json cmd_classify(const ExperimentConfig& config, const std::filesystem::path& dataset_dir,
                         const std::filesystem::path& out_dir) {
  const std::vector<RunData> runs = read_dataset(dataset_dir);
  std::filesystem::create_directories(out_dir);
  json result{{"command", "classify"}, {"config", config_to_json(config)}, {"outputs", json::array()}};
  for (ClusterMethod method : methods_from_spec(config.method)) {
    const ClassifyOutput out = classify_runs(runs, method, config);
    const std::string tag = method_name(method);
    for (std::size_t i = 0; i < out.labelings.size(); ++i) {
      const std::string name = "labels_" + tag + "_" + run_basename(static_cast<int>(i)) + ".csv";
      atomic_write_file(out_dir / name, labels_to_csv(out.labelings[i], runs[i].population));
    }
    const std::string misclass_name = "misclass_" + tag + ".json";
    atomic_write_file(out_dir / misclass_name, classify_output_to_json(out, config).dump(2) + "\n");
    result["outputs"].push_back(json{{"method", tag},
                                     {"misclass_json", (out_dir / misclass_name).string()},
                                     {"label_files", static_cast<int>(out.labelings.size())}});
  }
  return result;
}

// -- evaluate ---------------------------------------------------------------

struct EvaluateResult {
  McsReport baseline;
  std::optional<McsReport> selected;  // per-run juries from the labels
  std::map<std::string, McsReport> expected;  // best/average/worst
};

inline McsReport report_over_runs(const std::vector<RunData>& runs, const RoundFilter& filter,
                                  int eval_rounds,
                                  const std::function<Jury(const RunData&, std::size_t)>& jury_of,
                                  const std::string& jury_desc) {
  std::vector<double> values;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunData slice = eval_slice(runs[i], eval_rounds);
    if (const auto v = mcs(slice, jury_of(slice, i), filter)) values.push_back(*v);
  }
  McsReport report = aggregate_mcs(values);
  report.jury = jury_desc;
  report.filter = filter.name;
  return report;
}

inline McsReport baseline_report(const std::vector<RunData>& runs, const RoundFilter& filter,
                                 int eval_rounds) {
  return report_over_runs(
      runs, filter, eval_rounds,
      [](const RunData& slice, std::size_t) {
        Jury jury;
        for (int a = 0; a < slice.agents(); ++a) jury.agents.push_back(a);
        return jury;
      },
      "baseline");
}

inline McsReport expected_jury_report(const std::vector<RunData>& runs, const RoundFilter& filter,
                                      int eval_rounds, const MisclassSummary& summary,
                                      JuryMode mode) {
  return report_over_runs(
      runs, filter, eval_rounds,
      [&](const RunData& slice, std::size_t) { return expected_jury(slice.population, summary, mode); },
      std::string("expected_") + jury_mode_name(mode));
}

inline McsReport selected_jury_report(const std::vector<RunData>& runs, const RoundFilter& filter,
                                      int eval_rounds, const std::vector<AgentLabeling>& labelings) {
  if (labelings.size() != runs.size()) {
    throw std::invalid_argument("selected_jury_report: one labeling per run required");
  }
  return report_over_runs(
      runs, filter, eval_rounds,
      [&](const RunData&, std::size_t i) { return select_jury(labelings[i]); }, "selected");
}

inline EvaluateResult evaluate_runs(const std::vector<RunData>& runs, const RoundFilter& filter,
                                    int eval_rounds, const std::vector<AgentLabeling>* labelings,
                                    const MisclassSummary* summary) {
  EvaluateResult result;
  result.baseline = baseline_report(runs, filter, eval_rounds);
  if (labelings) result.selected = selected_jury_report(runs, filter, eval_rounds, *labelings);
  if (summary) {
    for (JuryMode mode : {JuryMode::Best, JuryMode::Average, JuryMode::Worst}) {
      result.expected[jury_mode_name(mode)] =
          expected_jury_report(runs, filter, eval_rounds, *summary, mode);
    }
  }
  return result;
}

inline json cmd_evaluate(const ExperimentConfig& config, const std::filesystem::path& dataset_dir,
                         const std::filesystem::path& labels_dir,
                         const std::filesystem::path& out_path) {
  const std::vector<RunData> runs = read_dataset(dataset_dir);
  const RoundFilter filter = filter_from_name(config.filter);

  json reports = json::object();
  for (ClusterMethod method : methods_from_spec(config.method)) {
    const std::string tag = method_name(method);

    std::vector<AgentLabeling> labelings;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const std::filesystem::path labels_path =
          labels_dir / ("labels_" + tag + "_" + run_basename(static_cast<int>(i)) + ".csv");
      if (!std::filesystem::exists(labels_path)) {
        throw std::runtime_error("missing labels file: " + labels_path.string());
      }
      LabelFile file = labels_from_csv(labels_path);
      if (file.labeling.agents() != runs[i].agents()) {
        throw std::invalid_argument(labels_path.string() + ": label count does not match dataset agents");
      }
      labelings.push_back(std::move(file.labeling));
    }

    std::ifstream in(labels_dir / ("misclass_" + tag + ".json"));
    if (!in) throw std::runtime_error("missing misclassification summary for method " + tag);
    const json mj = json::parse(in);
    const MisclassSummary summary = misclass_summary_from_json(mj.at("summary").at("per_type"));

    const EvaluateResult result =
        evaluate_runs(runs, filter, config.eval_rounds, &labelings, &summary);
    json method_reports{{"baseline", mcs_report_to_json(result.baseline)},
                        {"selected", mcs_report_to_json(*result.selected)}};
    for (const auto& [mode, report] : result.expected) {
      method_reports["expected_" + mode] = mcs_report_to_json(report);
    }
    reports[tag] = method_reports;
  }

  const json out{{"command", "evaluate"},
                 {"config", config_to_json(config)},
                 {"filter", config.filter},
                 {"reports", reports}};
  atomic_write_file(out_path, out.dump(2) + "\n");
  return out;
}

}  // namespace jurysim
