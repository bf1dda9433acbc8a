#include "evopipe/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "evopipe/config.hpp"

namespace evopipe {

namespace {

using nlohmann::json;

json rng_to_json(const std::array<std::uint64_t, 4>& s) { return json::array({s[0], s[1], s[2], s[3]}); }

std::array<std::uint64_t, 4> rng_from_json(const json& j) {
  std::array<std::uint64_t, 4> s{};
  for (std::size_t i = 0; i < 4; ++i) s[i] = j.at(i).get<std::uint64_t>();
  return s;
}

json log_to_json(const GenerationLog& g) {
  return json{{"generation", g.generation},
              {"best_fitness", g.best_fitness},
              {"mean_fitness", g.mean_fitness},
              {"best_so_far", g.best_so_far},
              {"vision_clusters", g.vision_clusters},
              {"vision_noise", g.vision_noise},
              {"decision_clusters", g.decision_clusters},
              {"decision_noise", g.decision_noise},
              {"actual_evaluations", g.actual_evaluations},
              {"theoretical_evaluations", g.theoretical_evaluations},
              {"wall_seconds", g.wall_seconds}};
}

GenerationLog log_from_json(const json& j) {
  GenerationLog g;
  g.generation = j.at("generation").get<int>();
  g.best_fitness = j.at("best_fitness").get<double>();
  g.mean_fitness = j.at("mean_fitness").get<double>();
  g.best_so_far = j.at("best_so_far").get<double>();
  g.vision_clusters = j.at("vision_clusters").get<int>();
  g.vision_noise = j.at("vision_noise").get<int>();
  g.decision_clusters = j.at("decision_clusters").get<int>();
  g.decision_noise = j.at("decision_noise").get<int>();
  g.actual_evaluations = j.at("actual_evaluations").get<long>();
  g.theoretical_evaluations = j.at("theoretical_evaluations").get<long>();
  g.wall_seconds = j.at("wall_seconds").get<double>();
  return g;
}

json snapshot_to_json(const CoevoSnapshot& s) {
  json cma;
  cma["dimension"] = s.cma.dimension;
  cma["population_size"] = s.cma.population_size;
  cma["generation"] = s.cma.generation;
  cma["sigma"] = s.cma.sigma;
  cma["eigen_repairs"] = s.cma.eigen_repairs;
  cma["mean"] = s.cma.mean;
  cma["path_sigma"] = s.cma.path_sigma;
  cma["path_cov"] = s.cma.path_cov;
  cma["covariance"] = s.cma.covariance;

  json j;
  j["generation"] = s.generation;
  j["cma"] = std::move(cma);
  j["gp_trees"] = s.gp_trees;
  j["gp_generation"] = s.gp_generation;
  j["rng_cma"] = rng_to_json(s.rng_cma);
  j["rng_gp"] = rng_to_json(s.rng_gp);
  j["actual_evaluations"] = s.actual_evaluations;
  j["theoretical_evaluations"] = s.theoretical_evaluations;
  j["best_params"] = s.best_params;
  j["best_tree"] = s.best_tree;
  j["best_fitness"] = s.best_fitness;
  j["best_generation"] = s.best_generation;
  json history = json::array();
  for (const GenerationLog& g : s.history) history.push_back(log_to_json(g));
  j["history"] = std::move(history);
  return j;
}

CoevoSnapshot snapshot_from_json(const json& j) {
  CoevoSnapshot s;
  s.generation = j.at("generation").get<int>();
  const json& cma = j.at("cma");
  s.cma.dimension = cma.at("dimension").get<int>();
  s.cma.population_size = cma.at("population_size").get<int>();
  s.cma.generation = cma.at("generation").get<int>();
  s.cma.sigma = cma.at("sigma").get<double>();
  s.cma.eigen_repairs = cma.at("eigen_repairs").get<long>();
  s.cma.mean = cma.at("mean").get<std::vector<double>>();
  s.cma.path_sigma = cma.at("path_sigma").get<std::vector<double>>();
  s.cma.path_cov = cma.at("path_cov").get<std::vector<double>>();
  s.cma.covariance = cma.at("covariance").get<std::vector<double>>();
  s.gp_trees = j.at("gp_trees").get<std::vector<std::string>>();
  s.gp_generation = j.at("gp_generation").get<int>();
  s.rng_cma = rng_from_json(j.at("rng_cma"));
  s.rng_gp = rng_from_json(j.at("rng_gp"));
  s.actual_evaluations = j.at("actual_evaluations").get<long>();
  s.theoretical_evaluations = j.at("theoretical_evaluations").get<long>();
  s.best_params = j.at("best_params").get<std::vector<double>>();
  s.best_tree = j.at("best_tree").get<std::string>();
  s.best_fitness = j.at("best_fitness").get<double>();
  s.best_generation = j.at("best_generation").get<int>();
  for (const json& g : j.at("history")) s.history.push_back(log_from_json(g));
  return s;
}

json read_json_file(const std::string& path, const char* magic) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error(std::string(magic) + ": cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string(magic) + ": " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object() || j.value("magic", "") != magic)
    throw std::runtime_error(path + ": missing magic header '" + magic + "'");
  if (j.value("version", -1) != kFormatVersion)
    throw std::runtime_error(path + ": unsupported format version");
  return j;
}

}  // namespace

void save_checkpoint(const CoevoConfig& cfg, const CoevoSnapshot& snap, const std::string& path) {
  json j;
  j["magic"] = kCheckpointMagic;
  j["version"] = kFormatVersion;
  j["config"] = config_to_json(cfg);
  j["state"] = snapshot_to_json(snap);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("checkpoint: cannot write " + path);
  f << j.dump() << "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const json j = read_json_file(path, kCheckpointMagic);
  LoadedCheckpoint out{config_from_json(j.at("config")), snapshot_from_json(j.at("state"))};
  return out;
}

void save_pipeline(const PipelineArtifact& artifact, const std::string& path) {
  json j;
  j["magic"] = kPipelineMagic;
  j["version"] = kFormatVersion;
  j["k"] = artifact.kernel_count;
  j["kernel_size"] = artifact.kernel_size;
  j["vision_params"] = artifact.vision_params;
  j["tree"] = serialize_tree(*artifact.tree);
  j["fitness"] = artifact.fitness;
  j["generation"] = artifact.generation;
  j["env"] = env_to_json(artifact.env);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("pipeline: cannot write " + path);
  f << j.dump(2) << "\n";
}

PipelineArtifact load_pipeline(const std::string& path) {
  const json j = read_json_file(path, kPipelineMagic);
  PipelineArtifact a;
  try {
    a.kernel_count = j.at("k").get<int>();
    a.kernel_size = j.at("kernel_size").get<int>();
    a.vision_params = j.at("vision_params").get<std::vector<double>>();
    a.tree = parse_tree(j.at("tree").get<std::string>());
    a.fitness = j.at("fitness").get<double>();
    a.generation = j.at("generation").get<int>();
    a.env = env_from_json(j.at("env"));
  } catch (const json::exception& e) {
    throw std::runtime_error("pipeline: " + path + " is corrupt: " + e.what());
  }
  const std::size_t expected =
      static_cast<std::size_t>(a.kernel_count) * a.kernel_size * a.kernel_size * 3;
  if (a.vision_params.size() != expected)
    throw std::runtime_error("pipeline: " + path + " is corrupt: parameter count mismatch");
  return a;
}

}  // namespace evopipe
