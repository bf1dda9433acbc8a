#pragma once

#include <cstdint>
#include <vector>

#include "evopipe/dtree.hpp"
#include "evopipe/imaging.hpp"
#include "evopipe/minipong.hpp"
#include "evopipe/vision.hpp"

namespace evopipe {

using BehaviorSignature = std::vector<double>;

// Frozen per-run probe inputs: frames from a scripted random-policy episode
// for the vision population, uniform coordinate vectors for the decision
// population.
struct ProbeSet {
  std::vector<ProcessedFrame> vision_probes;
  std::vector<std::vector<double>> decision_probes;
};

ProbeSet make_probe_set(const EnvConfig& env, int n_vm, int n_dm, int kernel_count, int kernel_size,
                        std::uint64_t seed);

// Concatenated locate() outputs over all probe frames, flat (x, y) pairs;
// length 2k * n_vm.
BehaviorSignature vision_signature(const VisionModule& vm, const std::vector<ProcessedFrame>& probes);

// One-hot encoded tree outputs over all probe coordinate vectors; length
// n_dm * action_count.
BehaviorSignature decision_signature(const TreeNode& tree, const std::vector<std::vector<double>>& probes,
                                     int action_count);

inline constexpr int kNoiseLabel = -1;

// Density-based clustering with Euclidean distance. Core points have at
// least min_pts neighbors within eps, the point itself included. Labels are
// numbered in order of the first core point of each cluster; unassigned
// points get kNoiseLabel.
std::vector<int> dbscan(const std::vector<BehaviorSignature>& points, double eps, int min_pts);

struct EpsilonSchedule {
  double epsilon0 = 1.0;
  double gamma = 0.95;  // in [0, 1)
};

void validate_schedule(const EpsilonSchedule& s);

// eps_i = eps_0 * gamma^i
double epsilon_at(const EpsilonSchedule& s, int generation);

struct ClusterAssignment {
  std::vector<int> labels;           // dbscan output
  std::vector<int> representative;   // per individual: index actually evaluated
  std::vector<int> representatives;  // unique representative indices, ascending
};

// Medoid per cluster (minimum summed Euclidean distance, ties to the lowest
// index); every noise point represents itself.
ClusterAssignment select_representatives(const std::vector<BehaviorSignature>& points,
                                         const std::vector<int>& labels);

// Assignment where every individual is its own representative (clustering
// disabled).
ClusterAssignment identity_assignment(int count);

// Expands representative fitnesses to the full population; rep_fitness is
// indexed by position in assignment.representatives.
std::vector<double> broadcast_fitness(const ClusterAssignment& assignment,
                                      const std::vector<double>& rep_fitness);

}  // namespace evopipe
