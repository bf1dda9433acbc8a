#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evopipe/behavior.hpp"
#include "evopipe/cmaes.hpp"
#include "evopipe/gp.hpp"
#include "evopipe/minipong.hpp"

namespace evopipe {

struct CoevoConfig {
  int generations = 100;  // g
  int episodes = 3;       // e
  std::uint64_t master_seed = 1;
  int workers = 0;  // evaluation threads; 0 = hardware default
  bool clustering_enabled = true;
  bool mean_aggregation = false;  // pairing aggregation ablation; max by default

  int kernel_count = 2;  // k
  int kernel_size = 5;   // kernels are kernel_size x kernel_size x 3

  int n_vm = 100;
  int n_dm = 100;
  int min_pts = 2;
  EpsilonSchedule eps_vision{80.0, 0.95};
  EpsilonSchedule eps_decision{40.0, 0.95};

  int cma_population = 50;  // p_c
  double cma_initial_sigma = 0.1;
  double cma_initial_mean = 0.0;

  GpConfig gp;  // population_size is p_g; arity and action count are derived
  EnvConfig env;
};

// Fills the derived fields (variable arity, action count, CMA dimension
// inputs) and validates everything. Throws std::invalid_argument.
void finalize_config(CoevoConfig& cfg);

int cma_dimension(const CoevoConfig& cfg);  // k * size * size * 3

// Mean episode scores for every evaluated (vision, decision) pairing.
struct FitnessMatrix {
  std::vector<int> vision_reps;
  std::vector<int> decision_reps;
  std::vector<double> scores;  // row-major |vision_reps| x |decision_reps|

  double at(std::size_t i, std::size_t j) const { return scores[i * decision_reps.size() + j]; }
};

enum class FitnessAggregation { Max, Mean };

// Row/column maxima (or means under the ablation switch): first the vision
// fitnesses, then the decision fitnesses.
std::pair<std::vector<double>, std::vector<double>> fitness_from_matrix(
    const FitnessMatrix& m, FitnessAggregation aggregation = FitnessAggregation::Max);

// Runs the pipeline for one episode per seed and returns the episode
// totals. A fault inside the environment scores the episode at the minimum
// and is reported on stderr.
std::vector<double> evaluate_episodes(const VisionModule& vm, const TreeNode& tree, const EnvConfig& env,
                                      std::span<const std::uint64_t> seeds);

// Mean of evaluate_episodes over the given seeds.
double evaluate_pair(const VisionModule& vm, const TreeNode& tree, const EnvConfig& env,
                     std::span<const std::uint64_t> seeds);

struct GenerationLog {
  int generation = 0;
  double best_fitness = 0.0;      // best matrix entry this generation
  double mean_fitness = 0.0;      // mean matrix entry this generation
  double best_so_far = 0.0;
  int vision_clusters = 0;
  int vision_noise = 0;
  int decision_clusters = 0;
  int decision_noise = 0;
  long actual_evaluations = 0;       // episodes simulated this generation
  long theoretical_evaluations = 0;  // p_c * p_g * e
  double wall_seconds = 0.0;
};

struct BestPipeline {
  std::vector<double> vision_params;
  std::unique_ptr<TreeNode> tree;
  double fitness = 0.0;
  int generation = -1;

  bool valid() const { return tree != nullptr; }
};

// Everything needed to resume a run exactly; probe sets are reconstructed
// from the master seed.
struct CoevoSnapshot {
  int generation = 0;
  CmaSnapshot cma;
  std::vector<std::string> gp_trees;
  int gp_generation = 0;
  std::array<std::uint64_t, 4> rng_cma{};
  std::array<std::uint64_t, 4> rng_gp{};
  long actual_evaluations = 0;
  long theoretical_evaluations = 0;
  std::vector<double> best_params;
  std::string best_tree;
  double best_fitness = 0.0;
  int best_generation = -1;
  std::vector<GenerationLog> history;
};

// Two-population loop: CMA-ES samples kernel banks, GP holds the trees;
// each generation clusters both populations by behavior, evaluates the
// representative pairings on seeded episodes and feeds the broadcast
// fitnesses back to both optimizers.
class Coevolution {
 public:
  explicit Coevolution(const CoevoConfig& cfg);

  void generation_step();
  bool finished() const { return generation_ >= cfg_.generations; }

  int generation() const { return generation_; }
  const CoevoConfig& config() const { return cfg_; }
  const BestPipeline& best() const { return best_; }
  const std::vector<GenerationLog>& history() const { return history_; }
  long actual_evaluations() const { return actual_evaluations_; }
  long theoretical_evaluations() const { return theoretical_evaluations_; }
  const ProbeSet& probes() const { return probes_; }
  const CmaEs& cma() const { return cma_; }
  const GpPopulation& gp_population() const { return gp_pop_; }

  CoevoSnapshot snapshot() const;
  static Coevolution restore(const CoevoConfig& cfg, const CoevoSnapshot& snap);

  // Held-out seeds disjoint from every training episode seed.
  static std::vector<std::uint64_t> heldout_seeds(std::uint64_t master_seed, int count);

 private:
  CoevoConfig cfg_;
  ProbeSet probes_;
  CmaEs cma_;
  GpPopulation gp_pop_;
  Rng rng_cma_;
  Rng rng_gp_;
  int generation_ = 0;
  long actual_evaluations_ = 0;
  long theoretical_evaluations_ = 0;
  BestPipeline best_;
  std::vector<GenerationLog> history_;
};

}  // namespace evopipe
