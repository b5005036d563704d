#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "jurysim/engine.hpp"
#include "jurysim/labeling.hpp"
#include "jurysim/metrics.hpp"

namespace jurysim {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

// All writes go through a temp file renamed into place, so a crash or full
// disk never leaves a truncated file behind under the final name.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("rename failed: " + path.string() + ": " + ec.message());
}

namespace detail {

inline int parse_vote_cell(std::string_view cell, const std::filesystem::path& path, int line,
                           int column) {
  int value = 0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end || (value != 1 && value != -1)) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": column " +
                             std::to_string(column) + ": expected 1 or -1, got '" +
                             std::string(cell) + "'");
  }
  return value;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

}  // namespace detail

// Vote CSV: `round,p1,p2,p3,agent_0,...,agent_{n-1}`, one row per round,
// every vote cell 1 or -1.
inline std::string votes_to_csv(const RunData& data) {
  std::string out;
  out.reserve(static_cast<std::size_t>(data.rounds()) * (static_cast<std::size_t>(data.agents()) * 3 + 16));
  out += "round,p1,p2,p3";
  for (int a = 0; a < data.agents(); ++a) {
    out += ",agent_";
    out += std::to_string(a);
  }
  out += '\n';
  for (int t = 0; t < data.rounds(); ++t) {
    const RoundProps& p = data.props[static_cast<std::size_t>(t)];
    out += std::to_string(t);
    out += p.p1 == 1 ? ",1" : ",-1";
    out += p.p2 == 1 ? ",1" : ",-1";
    out += p.p3 == 1 ? ",1" : ",-1";
    for (int a = 0; a < data.agents(); ++a) {
      out += data.votes(t, a) == 1 ? ",1" : ",-1";
    }
    out += '\n';
  }
  return out;
}

// Parses a vote CSV; throws with file:line context on any malformation.
// Population and noise are not in the CSV -- the caller restores them from
// the manifest.
inline RunData votes_from_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ":1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = detail::split_csv_line(line);
  if (header.size() < 5 || header[0] != "round" || header[1] != "p1" || header[2] != "p2" ||
      header[3] != "p3") {
    throw std::runtime_error(path.string() + ":1: expected header round,p1,p2,p3,agent_0,...");
  }
  const int n = static_cast<int>(header.size()) - 4;
  for (int a = 0; a < n; ++a) {
    if (header[static_cast<std::size_t>(a) + 4] != "agent_" + std::to_string(a)) {
      throw std::runtime_error(path.string() + ":1: agent columns must be agent_0..agent_" +
                               std::to_string(n - 1));
    }
  }

  std::vector<RoundProps> props;
  std::vector<std::int8_t> flat;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (static_cast<int>(cells.size()) != n + 4) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(n + 4) + " cells, got " +
                               std::to_string(cells.size()));
    }
    int round = 0;
    {
      const auto* end = cells[0].data() + cells[0].size();
      const auto [ptr, ec] = std::from_chars(cells[0].data(), end, round);
      if (ec != std::errc{} || ptr != end || round != static_cast<int>(props.size())) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                 ": round index must be " + std::to_string(props.size()));
      }
    }
    RoundProps p;
    p.p1 = static_cast<std::int8_t>(detail::parse_vote_cell(cells[1], path, lineno, 1));
    p.p2 = static_cast<std::int8_t>(detail::parse_vote_cell(cells[2], path, lineno, 2));
    p.p3 = static_cast<std::int8_t>(detail::parse_vote_cell(cells[3], path, lineno, 3));
    props.push_back(p);
    for (int a = 0; a < n; ++a) {
      flat.push_back(static_cast<std::int8_t>(
          detail::parse_vote_cell(cells[static_cast<std::size_t>(a) + 4], path, lineno, a + 4)));
    }
  }
  if (props.empty()) throw std::runtime_error(path.string() + ": no data rows");

  RunData data;
  const int r = static_cast<int>(props.size());
  data.votes.resize(r, n);
  for (int t = 0; t < r; ++t) {
    for (int a = 0; a < n; ++a) {
      data.votes(t, a) = flat[static_cast<std::size_t>(t) * static_cast<std::size_t>(n) +
                              static_cast<std::size_t>(a)];
    }
  }
  data.props = std::move(props);
  return data;
}

inline json noise_to_json(const NoiseLevel& noise) {
  return json{{"prob_p1", noise.prob_p1}, {"prob_p2", noise.prob_p2}, {"prob_p3", noise.prob_p3}};
}

inline NoiseLevel noise_from_json(const json& j) {
  NoiseLevel noise;
  noise.prob_p1 = j.at("prob_p1").get<double>();
  noise.prob_p2 = j.at("prob_p2").get<double>();
  noise.prob_p3 = j.at("prob_p3").get<double>();
  noise.validate();
  return noise;
}

inline json population_to_json(const Population& pop) {
  json counts = json::object();
  for (AgentType t : kAgentTypes) {
    if (pop.count(t) > 0) counts[std::string(type_tag(t))] = pop.count(t);
  }
  return counts;
}

inline Population population_from_json(const json& j) {
  std::array<int, kNumAgentTypes> counts{};
  for (const auto& [key, value] : j.items()) {
    const auto type = type_from_tag(key);
    if (!type) throw std::runtime_error("manifest: unknown agent type tag '" + key + "'");
    counts[static_cast<std::size_t>(type_index(*type))] = value.get<int>();
  }
  return Population::from_counts(counts);
}

// Per-run manifest carrying ground truth: the dataset is unusable for
// misclassification scoring without the true type blocks.
inline json manifest_to_json(const RunData& data, std::uint64_t master_seed, int run_index,
                             const std::string& votes_csv) {
  return json{{"format_version", kFormatVersion},
              {"master_seed", master_seed},
              {"run_index", run_index},
              {"run_seed", data.seed},
              {"rounds", data.rounds()},
              {"noise", noise_to_json(data.noise)},
              {"population", population_to_json(data.population)},
              {"votes_csv", votes_csv}};
}

inline std::string run_basename(int run_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "run_%04d", run_index);
  return buf;
}

inline void write_run(const std::filesystem::path& dir, const RunData& data,
                      std::uint64_t master_seed, int run_index) {
  const std::string base = run_basename(run_index);
  atomic_write_file(dir / (base + ".csv"), votes_to_csv(data));
  atomic_write_file(dir / (base + ".manifest.json"),
                    manifest_to_json(data, master_seed, run_index, base + ".csv").dump(2) + "\n");
}

inline void write_dataset(const std::filesystem::path& dir, const std::vector<RunData>& runs,
                          std::uint64_t master_seed) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    write_run(dir, runs[i], master_seed, static_cast<int>(i));
  }
}

inline RunData read_run(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open: " + manifest_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(manifest_path.string() + ": " + e.what());
  }
  if (j.at("format_version").get<int>() != kFormatVersion) {
    throw std::runtime_error(manifest_path.string() + ": unsupported format version");
  }
  RunData data = votes_from_csv(manifest_path.parent_path() / j.at("votes_csv").get<std::string>());
  data.population = population_from_json(j.at("population"));
  data.noise = noise_from_json(j.at("noise"));
  data.seed = j.at("run_seed").get<std::uint64_t>();
  if (data.agents() != data.population.size()) {
    throw std::runtime_error(manifest_path.string() + ": population size does not match vote columns");
  }
  if (data.rounds() != j.at("rounds").get<int>()) {
    throw std::runtime_error(manifest_path.string() + ": round count does not match vote rows");
  }
  return data;
}

// Loads every run_*.manifest.json in the directory, in filename order.
inline std::vector<RunData> read_dataset(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> manifests;
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("dataset directory not found: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("run_") && name.ends_with(".manifest.json")) {
      manifests.push_back(entry.path());
    }
  }
  if (manifests.empty()) throw std::runtime_error("no run manifests in: " + dir.string());
  std::sort(manifests.begin(), manifests.end());
  std::vector<RunData> runs;
  runs.reserve(manifests.size());
  for (const auto& m : manifests) runs.push_back(read_run(m));
  return runs;
}

// Labels CSV: `agent_id,true_type,boot_1..boot_B,final`.
inline std::string labels_to_csv(const AgentLabeling& labeling, const Population& pop) {
  if (labeling.agents() != pop.size()) {
    throw std::invalid_argument("labels_to_csv: labeling does not cover the population");
  }
  std::string out = "agent_id,true_type";
  for (int b = 1; b <= labeling.bootstraps; ++b) out += ",boot_" + std::to_string(b);
  out += ",final\n";
  for (int a = 0; a < pop.size(); ++a) {
    out += std::to_string(a);
    out += ',';
    out += type_tag(pop.type_of(a));
    for (int b = 0; b < labeling.bootstraps; ++b) {
      out += ',';
      out += label_name(labeling.boot_labels[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]);
    }
    out += ',';
    out += label_name(labeling.final_labels[static_cast<std::size_t>(a)]);
    out += '\n';
  }
  return out;
}

struct LabelFile {
  AgentLabeling labeling;
  std::vector<AgentType> true_types;
};

inline LabelFile labels_from_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ":1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.size() < 4 || header[0] != "agent_id" || header[1] != "true_type" ||
      header.back() != "final") {
    throw std::runtime_error(path.string() + ":1: expected agent_id,true_type,boot_...,final");
  }
  const int bootstraps = static_cast<int>(header.size()) - 3;

  const auto parse_label = [&](std::string_view cell, int lineno) {
    if (cell == "authentic") return Label::Authentic;
    if (cell == "inauthentic") return Label::Inauthentic;
    throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                             ": expected authentic|inauthentic, got '" + std::string(cell) + "'");
  };

  LabelFile file;
  file.labeling.bootstraps = bootstraps;
  file.labeling.boot_labels.assign(static_cast<std::size_t>(bootstraps), {});
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (static_cast<int>(cells.size()) != bootstraps + 3) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(bootstraps + 3) + " cells");
    }
    const auto type = type_from_tag(cells[1]);
    if (!type) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": unknown agent type '" + std::string(cells[1]) + "'");
    }
    file.true_types.push_back(*type);
    for (int b = 0; b < bootstraps; ++b) {
      file.labeling.boot_labels[static_cast<std::size_t>(b)].push_back(
          parse_label(cells[static_cast<std::size_t>(b) + 2], lineno));
    }
    file.labeling.final_labels.push_back(parse_label(cells.back(), lineno));
  }
  if (file.labeling.final_labels.empty()) throw std::runtime_error(path.string() + ": no data rows");
  return file;
}

inline json type_misclass_to_json(const TypeMisclass& tm) {
  return json{{"mean", tm.mean}, {"sd", tm.sd}};
}

inline json misclass_summary_to_json(const MisclassSummary& summary) {
  json per_type = json::object();
  for (AgentType t : kAgentTypes) {
    const auto& entry = summary.by_type[static_cast<std::size_t>(type_index(t))];
    if (entry) per_type[std::string(type_tag(t))] = type_misclass_to_json(*entry);
  }
  return per_type;
}

inline MisclassSummary misclass_summary_from_json(const json& j) {
  MisclassSummary summary;
  for (const auto& [key, value] : j.items()) {
    const auto type = type_from_tag(key);
    if (!type) throw std::runtime_error("misclassification summary: unknown type tag '" + key + "'");
    TypeMisclass tm;
    tm.mean = value.at("mean").get<double>();
    tm.sd = value.at("sd").get<double>();
    summary.by_type[static_cast<std::size_t>(type_index(*type))] = tm;
  }
  return summary;
}

inline json mcs_report_to_json(const McsReport& report) {
  return json{{"mean", report.mean},
              {"sd", report.sd},
              {"runs", report.runs},
              {"jury", report.jury},
              {"filter", report.filter}};
}

}  // namespace jurysim
