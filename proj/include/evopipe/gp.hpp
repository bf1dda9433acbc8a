#pragma once

#include <memory>
#include <span>
#include <vector>

#include "evopipe/dtree.hpp"
#include "evopipe/rng.hpp"

namespace evopipe {

struct GpConfig {
  int population_size = 50;
  double crossover_probability = 0.0;  // crossover is not implemented; must stay 0
  double mutation_probability = 1.0;
  int tournament_size = 10;
  int elites = 1;
  int max_tree_depth = 4;
  int max_condition_depth = 2;
  int action_count = 4;
  int variable_arity = 4;  // 2k
  double constant_min = 0.0;
  double constant_max = 96.0;
};

// Throws std::invalid_argument naming the broken constraint.
void validate_config(const GpConfig& cfg);

struct GpPopulation {
  std::vector<std::unique_ptr<TreeNode>> individuals;
  int generation = 0;
};

// Typed grow: at nesting depth d a leaf is chosen with probability
// (d+1)/(max_depth+1), so the ramp reaches 1 exactly at the depth limit.
// Expressions grow the same way under max_condition_depth.
std::unique_ptr<TreeNode> random_tree(const GpConfig& cfg, Rng& rng);
std::unique_ptr<Expr> random_expr(const GpConfig& cfg, Rng& rng, int depth_budget);

GpPopulation init_population(const GpConfig& cfg, Rng& rng);

// Applies exactly one operator chosen uniformly among those applicable to
// the tree: typed subtree replacement, operator point mutation, Gaussian
// constant perturbation (sigma 5), or leaf action resampling.
std::unique_ptr<TreeNode> mutate(const TreeNode& tree, const GpConfig& cfg, Rng& rng);

// Tournament of tournament_size uniform draws with replacement; highest
// fitness wins, ties go to the lowest population index. Returns the index.
int tournament_select(const GpPopulation& pop, std::span<const double> fitness, const GpConfig& cfg, Rng& rng);

// Slot 0 preserves the best individual unchanged; the rest are mutated
// tournament winners.
GpPopulation next_generation(const GpPopulation& pop, std::span<const double> fitness, const GpConfig& cfg,
                             Rng& rng);

}  // namespace evopipe
