#pragma once

#include <string>
#include <vector>

#include "evopipe/coevo.hpp"

namespace evopipe {

inline constexpr const char* kVersionTag = "0.1.0";
inline constexpr int kHeldoutEpisodes = 100;

// Fixed log.csv column order.
std::string log_csv_header();
std::string log_csv_row(const GenerationLog& g);
std::vector<GenerationLog> read_log_csv(const std::string& path);

// Output directory layout: manifest.json, log.csv, checkpoints/gen_NNN.json,
// best_pipeline.json, summary.json, plots/. Executes the full co-evolution
// run (optionally resuming from the latest checkpoint), then re-tests the
// best pipeline on held-out episodes and writes the final artifacts.
void run_training(const CoevoConfig& cfg, const std::string& out_dir, bool resume, bool quiet = false);

std::vector<double> evaluate_episodes_parallel(const VisionModule& vm, const TreeNode& tree,
                                               const EnvConfig& env, std::span<const std::uint64_t> seeds,
                                               int workers);

// Fitness and cumulative-evaluation charts (mean +- std across runs) with
// the no-clustering theoretical line as reference.
void write_plots(const std::vector<std::string>& run_dirs, const std::string& plot_dir);

}  // namespace evopipe
