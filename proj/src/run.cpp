#include "evopipe/run.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "evopipe/checkpoint.hpp"
#include "evopipe/config.hpp"
#include "evopipe/stats.hpp"
#include "evopipe/svgplot.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evopipe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string checkpoint_name(int generation) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "gen_%03d.json", generation);
  return buf;
}

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_manifest(const CoevoConfig& cfg, const fs::path& dir) {
  json j;
  j["config"] = config_to_json(cfg);
  j["master_seed"] = cfg.master_seed;
  j["start_time"] = iso_timestamp();
  j["version"] = kVersionTag;
  j["layout"] = json{{"log", "log.csv"},
                     {"checkpoints", "checkpoints"},
                     {"best_pipeline", "best_pipeline.json"},
                     {"summary", "summary.json"},
                     {"plots", "plots"}};
  std::ofstream f(dir / "manifest.json");
  if (!f) throw std::runtime_error("train: cannot write manifest in " + dir.string());
  f << j.dump(2) << "\n";
}

int latest_checkpoint(const fs::path& ckpt_dir) {
  int best = -1;
  if (!fs::is_directory(ckpt_dir)) return best;
  for (const auto& entry : fs::directory_iterator(ckpt_dir)) {
    int gen = -1;
    if (std::sscanf(entry.path().filename().string().c_str(), "gen_%d.json", &gen) == 1) best = std::max(best, gen);
  }
  return best;
}

void rewrite_log(const std::vector<GenerationLog>& history, const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("train: cannot write " + path.string());
  f << log_csv_header() << "\n";
  for (const GenerationLog& g : history) f << log_csv_row(g) << "\n";
}

}  // namespace

std::string log_csv_header() {
  return "generation,best_fitness,mean_fitness,best_so_far,vision_clusters,vision_noise,"
         "decision_clusters,decision_noise,actual_evaluations,theoretical_evaluations,"
         "evaluations_saved,wall_seconds";
}

std::string log_csv_row(const GenerationLog& g) {
  std::string row = std::to_string(g.generation);
  row += "," + fmt_double(g.best_fitness);
  row += "," + fmt_double(g.mean_fitness);
  row += "," + fmt_double(g.best_so_far);
  row += "," + std::to_string(g.vision_clusters);
  row += "," + std::to_string(g.vision_noise);
  row += "," + std::to_string(g.decision_clusters);
  row += "," + std::to_string(g.decision_noise);
  row += "," + std::to_string(g.actual_evaluations);
  row += "," + std::to_string(g.theoretical_evaluations);
  row += "," + std::to_string(g.theoretical_evaluations - g.actual_evaluations);
  row += "," + fmt_double(g.wall_seconds);
  return row;
}

std::vector<GenerationLog> read_log_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("log: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("log: empty file " + path);
  if (line != log_csv_header()) throw std::runtime_error("log: unexpected header in " + path);
  std::vector<GenerationLog> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 12) throw std::runtime_error("log: malformed row in " + path);
    GenerationLog g;
    g.generation = std::stoi(fields[0]);
    g.best_fitness = std::stod(fields[1]);
    g.mean_fitness = std::stod(fields[2]);
    g.best_so_far = std::stod(fields[3]);
    g.vision_clusters = std::stoi(fields[4]);
    g.vision_noise = std::stoi(fields[5]);
    g.decision_clusters = std::stoi(fields[6]);
    g.decision_noise = std::stoi(fields[7]);
    g.actual_evaluations = std::stol(fields[8]);
    g.theoretical_evaluations = std::stol(fields[9]);
    g.wall_seconds = std::stod(fields[11]);
    out.push_back(g);
  }
  return out;
}

std::vector<double> evaluate_episodes_parallel(const VisionModule& vm, const TreeNode& tree,
                                               const EnvConfig& env, std::span<const std::uint64_t> seeds,
                                               int workers) {
  std::vector<double> totals(seeds.size(), 0.0);
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#else
  (void)workers;
#endif
  for (long i = 0; i < static_cast<long>(seeds.size()); ++i) {
    const std::uint64_t seed = seeds[static_cast<std::size_t>(i)];
    totals[static_cast<std::size_t>(i)] = evaluate_episodes(vm, tree, env, {&seed, 1})[0];
  }
  return totals;
}

void run_training(const CoevoConfig& cfg_in, const std::string& out_dir, bool resume, bool quiet) {
  CoevoConfig cfg = cfg_in;
  finalize_config(cfg);

  const fs::path dir(out_dir);
  const fs::path ckpt_dir = dir / "checkpoints";
  fs::create_directories(ckpt_dir);
  fs::create_directories(dir / "plots");

  Coevolution evo = [&]() {
    if (resume) {
      const int gen = latest_checkpoint(ckpt_dir);
      if (gen < 0) throw std::runtime_error("train: --resume given but no checkpoint found in " + ckpt_dir.string());
      LoadedCheckpoint ckpt = load_checkpoint((ckpt_dir / checkpoint_name(gen)).string());
      if (config_to_json(ckpt.config).dump() != config_to_json(cfg).dump())
        throw std::runtime_error("train: checkpoint config does not match the supplied config");
      if (!quiet) std::cout << "resuming from generation " << ckpt.snapshot.generation << "\n";
      return Coevolution::restore(cfg, ckpt.snapshot);
    }
    write_manifest(cfg, dir);
    return Coevolution(cfg);
  }();

  // The log is rewritten from checkpoint history on resume so the final
  // file matches an uninterrupted run (modulo the wall-time column).
  rewrite_log(evo.history(), dir / "log.csv");

  while (!evo.finished()) {
    evo.generation_step();
    const GenerationLog& g = evo.history().back();
    {
      std::ofstream f(dir / "log.csv", std::ios::app);
      f << log_csv_row(g) << "\n";
    }
    save_checkpoint(cfg, evo.snapshot(), (ckpt_dir / checkpoint_name(evo.generation())).string());
    if (!quiet)
      std::cout << "gen " << g.generation << "  best " << g.best_fitness << "  best-so-far " << g.best_so_far
                << "  reps " << (g.vision_clusters + g.vision_noise) << "x"
                << (g.decision_clusters + g.decision_noise) << "  evals " << g.actual_evaluations << "/"
                << g.theoretical_evaluations << "  (" << fmt_double(g.wall_seconds).substr(0, 5) << " s)\n";
  }

  if (!evo.best().valid()) throw std::runtime_error("train: run finished without a best pipeline");

  PipelineArtifact artifact;
  artifact.kernel_count = cfg.kernel_count;
  artifact.kernel_size = cfg.kernel_size;
  artifact.vision_params = evo.best().vision_params;
  artifact.tree = evo.best().tree->clone();
  artifact.fitness = evo.best().fitness;
  artifact.generation = evo.best().generation;
  artifact.env = cfg.env;
  save_pipeline(artifact, (dir / "best_pipeline.json").string());

  // Final report: the best pipeline re-tested on held-out episode seeds
  // disjoint from every training seed.
  const auto seeds = Coevolution::heldout_seeds(cfg.master_seed, kHeldoutEpisodes);
  const VisionModule vm =
      from_parameters(artifact.vision_params, cfg.kernel_count, cfg.kernel_size, cfg.kernel_size);
  const std::vector<double> scores = evaluate_episodes_parallel(vm, *artifact.tree, cfg.env, seeds, cfg.workers);

  json summary;
  summary["best_fitness"] = evo.best().fitness;
  summary["best_generation"] = evo.best().generation;
  summary["actual_evaluations"] = evo.actual_evaluations();
  summary["theoretical_evaluations"] = evo.theoretical_evaluations();
  summary["evaluation_ratio"] =
      static_cast<double>(evo.actual_evaluations()) / static_cast<double>(evo.theoretical_evaluations());
  summary["heldout"] = json{{"episodes", static_cast<int>(scores.size())},
                            {"mean", mean(scores)},
                            {"stddev", sample_stddev(scores)},
                            {"ci95", ci95_halfwidth(scores)},
                            {"scores", scores}};
  {
    std::ofstream f(dir / "summary.json");
    f << summary.dump(2) << "\n";
  }
  write_plots({out_dir}, (dir / "plots").string());

  if (!quiet)
    std::cout << "done: best fitness " << evo.best().fitness << " (gen " << evo.best().generation
              << "), held-out mean " << mean(scores) << " +- " << ci95_halfwidth(scores) << " over "
              << scores.size() << " episodes, evaluation ratio "
              << summary["evaluation_ratio"].get<double>() << "\n";
}

void write_plots(const std::vector<std::string>& run_dirs, const std::string& plot_dir) {
  if (run_dirs.empty()) throw std::invalid_argument("plot: no run directories given");
  std::vector<std::vector<GenerationLog>> logs;
  for (const std::string& d : run_dirs) {
    auto log = read_log_csv((fs::path(d) / "log.csv").string());
    if (log.empty()) throw std::runtime_error("plot: empty log in " + d);
    logs.push_back(std::move(log));
  }
  std::size_t gens = logs[0].size();
  for (const auto& l : logs) gens = std::min(gens, l.size());

  double best_possible = 0.0;
  bool have_reference = false;
  {
    const fs::path manifest = fs::path(run_dirs[0]) / "manifest.json";
    std::ifstream f(manifest);
    if (f) {
      json j;
      try {
        f >> j;
        best_possible = j.at("config").at("env").at("points_to_win").get<double>();
        have_reference = true;
      } catch (const json::exception&) {
        have_reference = false;
      }
    }
  }

  std::vector<double> x(gens);
  for (std::size_t i = 0; i < gens; ++i) x[i] = static_cast<double>(i);

  const auto aggregate = [&x, gens](const std::vector<std::vector<GenerationLog>>& src, auto&& get) {
    PlotSeries s;
    s.x = x;
    for (std::size_t i = 0; i < gens; ++i) {
      std::vector<double> vals;
      for (const auto& l : src) vals.push_back(get(l[i]));
      const double m = mean(vals);
      const double sd = sample_stddev(vals);
      s.y.push_back(m);
      s.band_lo.push_back(m - sd);
      s.band_hi.push_back(m + sd);
    }
    return s;
  };

  fs::create_directories(plot_dir);
  {
    PlotSpec spec;
    spec.title = "Best fitness per generation (mean +- std, " + std::to_string(logs.size()) + " runs)";
    spec.x_label = "generation";
    spec.y_label = "fitness";
    PlotSeries fit = aggregate(logs, [](const GenerationLog& g) { return g.best_so_far; });
    fit.label = "best-so-far fitness";
    spec.series.push_back(std::move(fit));
    if (have_reference) {
      PlotSeries ref;
      ref.label = "environment maximum";
      ref.color = "#b02020";
      ref.dashed = true;
      ref.x = {0.0, static_cast<double>(gens - 1)};
      ref.y = {best_possible, best_possible};
      spec.series.push_back(std::move(ref));
    }
    write_svg_chart(spec, (fs::path(plot_dir) / "fitness.svg").string());
  }
  {
    PlotSpec spec;
    spec.title = "Cumulative evaluations (mean +- std, " + std::to_string(logs.size()) + " runs)";
    spec.x_label = "generation";
    spec.y_label = "episode evaluations";
    std::vector<std::vector<GenerationLog>> cum = logs;
    for (auto& l : cum)
      for (std::size_t i = 1; i < l.size(); ++i) {
        l[i].actual_evaluations += l[i - 1].actual_evaluations;
        l[i].theoretical_evaluations += l[i - 1].theoretical_evaluations;
      }
    PlotSeries actual =
        aggregate(cum, [](const GenerationLog& g) { return static_cast<double>(g.actual_evaluations); });
    actual.label = "with clustering";
    PlotSeries theo =
        aggregate(cum, [](const GenerationLog& g) { return static_cast<double>(g.theoretical_evaluations); });
    theo.label = "without clustering (reference)";
    theo.color = "#b02020";
    theo.dashed = true;
    theo.band_lo.clear();
    theo.band_hi.clear();
    spec.series.push_back(std::move(actual));
    spec.series.push_back(std::move(theo));
    write_svg_chart(spec, (fs::path(plot_dir) / "evaluations.svg").string());
  }
}

}  // namespace evopipe
