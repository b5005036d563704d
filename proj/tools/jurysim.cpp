#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "jurysim/jurysim.hpp"

namespace {

void add_config_flags(CLI::App* cmd, jurysim::ExperimentConfig& config) {
  cmd->add_option("--seed", config.seed, "Master seed");
  cmd->add_option("--population", config.population,
                  "Population: full|all|b_up|d_up|l_up or counts like A=100,B_up=100");
  cmd->add_option("--noise", config.noise, "Noise: low|mid|high or three probabilities p1,p2,p3");
  cmd->add_option("--rounds", config.rounds, "Voting rounds per run");
  cmd->add_option("--runs", config.runs, "Independent runs");
  cmd->add_option("--method", config.method, "Clustering method: gmm|km|both");
  cmd->add_option("--bootstraps", config.bootstraps, "Bootstrap resamples per run");
  cmd->add_option("--threshold", config.threshold,
                  "Authentic bootstrap labels required for a final authentic label");
  cmd->add_option("--filter", config.filter, "Evaluation round filter: none|active");
  cmd->add_option("--q", config.q, "Spectral components used for clustering");
  cmd->add_option("--k-lo", config.k_lo, "Smallest candidate cluster count");
  cmd->add_option("--k-hi", config.k_hi, "Largest candidate cluster count");
  cmd->add_option("--eval-rounds", config.eval_rounds,
                  "Rounds used by classify/evaluate (0 = min(500, available))");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic voting simulator and jury selection pipeline"};
  app.require_subcommand(1);

  jurysim::ExperimentConfig config;
  std::string dataset_dir = "dataset";
  std::string labels_dir;
  std::string out_path;
  std::string target = "table2";
  double scale = 0.2;

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate runs and write vote CSVs + manifests");
  add_config_flags(simulate, config);
  simulate->add_option("--out", dataset_dir, "Output dataset directory");

  CLI::App* classify = app.add_subcommand("classify", "Label agents from a simulated dataset");
  add_config_flags(classify, config);
  classify->add_option("--dataset", dataset_dir, "Dataset directory (from simulate)");
  classify->add_option("--out", labels_dir, "Output directory for labels and misclassification JSON");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score juries on a dataset with its labels");
  add_config_flags(evaluate, config);
  evaluate->add_option("--dataset", dataset_dir, "Dataset directory (from simulate)");
  evaluate->add_option("--labels", labels_dir, "Labels directory (from classify)");
  evaluate->add_option("--out", out_path, "Report JSON path");

  CLI::App* reproduce = app.add_subcommand("reproduce", "Rebuild a reference table or figure dataset");
  reproduce->add_option("--target", target, "table2|table3|fig1|fig2");
  reproduce->add_option("--seed", config.seed, "Master seed");
  reproduce->add_option("--scale", scale, "Run-count scale factor (1.0 = 100 runs per cell)");
  reproduce->add_option("--out", out_path, "Output directory");

  try {
    app.parse(argc, argv);

    jurysim::json result;
    if (simulate->parsed()) {
      result = jurysim::cmd_simulate(config, dataset_dir);
    } else if (classify->parsed()) {
      if (labels_dir.empty()) labels_dir = dataset_dir;
      result = jurysim::cmd_classify(config, dataset_dir, labels_dir);
    } else if (evaluate->parsed()) {
      if (labels_dir.empty()) labels_dir = dataset_dir;
      if (out_path.empty()) out_path = (std::filesystem::path(labels_dir) / "evaluate.json").string();
      result = jurysim::cmd_evaluate(config, dataset_dir, labels_dir, out_path);
    } else {
      if (out_path.empty()) out_path = "reproduce";
      result = jurysim::cmd_reproduce(target, config.seed, scale, out_path);
    }
    std::cout << result.dump(2) << std::endl;
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << jurysim::json{{"error", {{"type", "usage"}, {"message", e.what()}}}}.dump()
              << std::endl;
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << jurysim::json{{"error", {{"type", "runtime"}, {"message", e.what()}}}}.dump()
              << std::endl;
    return 1;
  }
}
