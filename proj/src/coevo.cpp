#include "evopipe/coevo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evopipe {

namespace {

// Stream tags for deterministic seed derivation from the master seed.
constexpr std::uint64_t kTagEpisode = 0xE51D0DE5ULL;
constexpr std::uint64_t kTagHoldout = 0x401D0175ULL;
constexpr std::uint64_t kTagProbes = 0x9806E5E7ULL;
constexpr std::uint64_t kTagCmaRng = 0xC3A35EEDULL;
constexpr std::uint64_t kTagGpRng = 0x69B5EEDFULL;

int worker_count(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

}  // namespace

int cma_dimension(const CoevoConfig& cfg) { return cfg.kernel_count * cfg.kernel_size * cfg.kernel_size * 3; }

void finalize_config(CoevoConfig& cfg) {
  if (cfg.generations < 1) throw std::invalid_argument("coevo: generations must be >= 1");
  if (cfg.episodes < 1) throw std::invalid_argument("coevo: episodes must be >= 1");
  if (cfg.kernel_count < 1) throw std::invalid_argument("coevo: kernel_count must be >= 1");
  if (cfg.kernel_size < 1 || cfg.kernel_size > kImageSize)
    throw std::invalid_argument("coevo: kernel_size must be in [1, image size]");
  if (cfg.n_vm < 1 || cfg.n_dm < 1) throw std::invalid_argument("coevo: n_vm and n_dm must be >= 1");
  if (cfg.min_pts < 1) throw std::invalid_argument("coevo: min_pts must be >= 1");
  if (cfg.cma_population < 2) throw std::invalid_argument("coevo: p_c must be >= 2");
  if (!(cfg.cma_initial_sigma > 0.0)) throw std::invalid_argument("coevo: cma initial sigma must be > 0");
  if (cfg.workers < 0) throw std::invalid_argument("coevo: workers must be >= 0");
  validate_schedule(cfg.eps_vision);
  validate_schedule(cfg.eps_decision);
  validate_config(cfg.env);

  cfg.gp.variable_arity = 2 * cfg.kernel_count;
  cfg.gp.action_count = MiniPong::kActionCount;
  validate_config(cfg.gp);
}

std::pair<std::vector<double>, std::vector<double>> fitness_from_matrix(const FitnessMatrix& m,
                                                                        FitnessAggregation aggregation) {
  const std::size_t rows = m.vision_reps.size();
  const std::size_t cols = m.decision_reps.size();
  if (rows == 0 || cols == 0 || m.scores.size() != rows * cols)
    throw std::invalid_argument("fitness_from_matrix: matrix must be fully populated");

  std::vector<double> vision(rows), decision(cols);
  if (aggregation == FitnessAggregation::Max) {
    for (std::size_t i = 0; i < rows; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < cols; ++j) best = std::max(best, m.at(i, j));
      vision[i] = best;
    }
    for (std::size_t j = 0; j < cols; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows; ++i) best = std::max(best, m.at(i, j));
      decision[j] = best;
    }
  } else {
    for (std::size_t i = 0; i < rows; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < cols; ++j) sum += m.at(i, j);
      vision[i] = sum / static_cast<double>(cols);
    }
    for (std::size_t j = 0; j < cols; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < rows; ++i) sum += m.at(i, j);
      decision[j] = sum / static_cast<double>(rows);
    }
  }
  return {std::move(vision), std::move(decision)};
}

std::vector<double> evaluate_episodes(const VisionModule& vm, const TreeNode& tree, const EnvConfig& env,
                                      std::span<const std::uint64_t> seeds) {
  std::vector<double> totals(seeds.size(), 0.0);
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    try {
      MiniPong pong(env, seeds[s]);
      double total = 0.0;
      while (!pong.done()) {
        const ProcessedFrame processed = preprocess(pong.observation());
        const std::vector<double> inputs = coordinates_to_inputs(locate(vm, processed));
        const int action = evaluate(tree, inputs);
        total += pong.step(action).reward;
      }
      totals[s] = total;
    } catch (const std::exception& e) {
      std::cerr << "evopipe: environment fault during evaluation (seed " << seeds[s] << "): " << e.what()
                << "; scoring episode at minimum\n";
      totals[s] = -static_cast<double>(env.points_to_win);
    }
  }
  return totals;
}

double evaluate_pair(const VisionModule& vm, const TreeNode& tree, const EnvConfig& env,
                     std::span<const std::uint64_t> seeds) {
  const std::vector<double> totals = evaluate_episodes(vm, tree, env, seeds);
  double sum = 0.0;
  for (double t : totals) sum += t;
  return sum / static_cast<double>(totals.size());
}

namespace {

CoevoConfig finalized(CoevoConfig cfg) {
  finalize_config(cfg);
  return cfg;
}

}  // namespace

Coevolution::Coevolution(const CoevoConfig& cfg)
    : cfg_(finalized(cfg)),
      probes_(make_probe_set(cfg_.env, cfg_.n_vm, cfg_.n_dm, cfg_.kernel_count, cfg_.kernel_size,
                             derive_seed({cfg_.master_seed, kTagProbes}))),
      cma_(CmaConfig{cma_dimension(cfg_), cfg_.cma_population, cfg_.cma_initial_sigma,
                     std::vector<double>(static_cast<std::size_t>(cma_dimension(cfg_)), cfg_.cma_initial_mean)}),
      rng_cma_(derive_seed({cfg_.master_seed, kTagCmaRng})),
      rng_gp_(derive_seed({cfg_.master_seed, kTagGpRng})) {
  gp_pop_ = init_population(cfg_.gp, rng_gp_);
  best_.fitness = -std::numeric_limits<double>::infinity();
}

std::vector<std::uint64_t> Coevolution::heldout_seeds(std::uint64_t master_seed, int count) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    seeds[static_cast<std::size_t>(i)] = derive_seed({master_seed, kTagHoldout, static_cast<std::uint64_t>(i)});
  return seeds;
}

void Coevolution::generation_step() {
  const auto t_start = std::chrono::steady_clock::now();

  // (1) Candidate pipelines for this generation.
  const auto candidates = cma_.ask(rng_cma_);
  std::vector<VisionModule> modules;
  modules.reserve(candidates.size());
  for (const auto& params : candidates)
    modules.push_back(from_parameters(params, cfg_.kernel_count, cfg_.kernel_size, cfg_.kernel_size));
  const int p_c = static_cast<int>(modules.size());
  const int p_g = static_cast<int>(gp_pop_.individuals.size());
  const int threads = worker_count(cfg_.workers);

  // (2)+(3) Behavior signatures and clustering, each population separately.
  ClusterAssignment vision_assign, decision_assign;
  if (cfg_.clustering_enabled) {
    std::vector<BehaviorSignature> vsigs(static_cast<std::size_t>(p_c));
    std::vector<BehaviorSignature> dsigs(static_cast<std::size_t>(p_g));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (int i = 0; i < p_c; ++i)
      vsigs[static_cast<std::size_t>(i)] =
          vision_signature(modules[static_cast<std::size_t>(i)], probes_.vision_probes);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (int j = 0; j < p_g; ++j)
      dsigs[static_cast<std::size_t>(j)] = decision_signature(*gp_pop_.individuals[static_cast<std::size_t>(j)],
                                                              probes_.decision_probes, cfg_.gp.action_count);
    vision_assign = select_representatives(
        vsigs, dbscan(vsigs, epsilon_at(cfg_.eps_vision, generation_), cfg_.min_pts));
    decision_assign = select_representatives(
        dsigs, dbscan(dsigs, epsilon_at(cfg_.eps_decision, generation_), cfg_.min_pts));
  } else {
    vision_assign = identity_assignment(p_c);
    decision_assign = identity_assignment(p_g);
  }

  // (4) Evaluate every representative x representative pairing. Episode
  // seeds are pre-derived per cell so the matrix is identical for any
  // worker count or completion order.
  FitnessMatrix matrix;
  matrix.vision_reps = vision_assign.representatives;
  matrix.decision_reps = decision_assign.representatives;
  const std::size_t rows = matrix.vision_reps.size();
  const std::size_t cols = matrix.decision_reps.size();
  matrix.scores.assign(rows * cols, 0.0);

  const long n_cells = static_cast<long>(rows * cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (long cell = 0; cell < n_cells; ++cell) {
    const std::size_t i = static_cast<std::size_t>(cell) / cols;
    const std::size_t j = static_cast<std::size_t>(cell) % cols;
    const int rep_i = matrix.vision_reps[i];
    const int rep_j = matrix.decision_reps[j];
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(cfg_.episodes));
    for (int ep = 0; ep < cfg_.episodes; ++ep)
      seeds[static_cast<std::size_t>(ep)] =
          derive_seed({cfg_.master_seed, kTagEpisode, static_cast<std::uint64_t>(generation_),
                       static_cast<std::uint64_t>(rep_i), static_cast<std::uint64_t>(rep_j),
                       static_cast<std::uint64_t>(ep)});
    matrix.scores[static_cast<std::size_t>(cell)] = evaluate_pair(
        modules[static_cast<std::size_t>(rep_i)], *gp_pop_.individuals[static_cast<std::size_t>(rep_j)],
        cfg_.env, seeds);
  }

  // (5) Representative fitnesses via the aggregation rule, broadcast to
  // every cluster member.
  const auto aggregation = cfg_.mean_aggregation ? FitnessAggregation::Mean : FitnessAggregation::Max;
  const auto [vision_rep_fitness, decision_rep_fitness] = fitness_from_matrix(matrix, aggregation);
  const std::vector<double> vision_fitness = broadcast_fitness(vision_assign, vision_rep_fitness);
  const std::vector<double> decision_fitness = broadcast_fitness(decision_assign, decision_rep_fitness);

  // (7) Track the best pairing seen so far (argmax cell, lowest indices on
  // ties).
  std::size_t best_cell = 0;
  for (std::size_t c = 1; c < matrix.scores.size(); ++c)
    if (matrix.scores[c] > matrix.scores[best_cell]) best_cell = c;
  if (matrix.scores[best_cell] > best_.fitness) {
    const std::size_t bi = best_cell / cols;
    const std::size_t bj = best_cell % cols;
    best_.vision_params = candidates[static_cast<std::size_t>(matrix.vision_reps[bi])];
    best_.tree = gp_pop_.individuals[static_cast<std::size_t>(matrix.decision_reps[bj])]->clone();
    best_.fitness = matrix.scores[best_cell];
    best_.generation = generation_;
  }

  // (6) Feed both optimizers.
  cma_.tell(candidates, vision_fitness);
  gp_pop_ = next_generation(gp_pop_, decision_fitness, cfg_.gp, rng_gp_);

  // (8) Evaluation accounting.
  const long actual = n_cells * cfg_.episodes;
  const long theoretical = static_cast<long>(p_c) * p_g * cfg_.episodes;
  actual_evaluations_ += actual;
  theoretical_evaluations_ += theoretical;

  GenerationLog log;
  log.generation = generation_;
  log.best_fitness = matrix.scores[best_cell];
  double mean = 0.0;
  for (double s : matrix.scores) mean += s;
  log.mean_fitness = mean / static_cast<double>(matrix.scores.size());
  log.best_so_far = best_.fitness;
  const auto count_noise = [](const ClusterAssignment& a) {
    return static_cast<int>(std::count(a.labels.begin(), a.labels.end(), kNoiseLabel));
  };
  const auto count_clusters = [](const ClusterAssignment& a) {
    int max_label = -1;
    for (int l : a.labels) max_label = std::max(max_label, l);
    return max_label + 1;
  };
  log.vision_clusters = count_clusters(vision_assign);
  log.vision_noise = count_noise(vision_assign);
  log.decision_clusters = count_clusters(decision_assign);
  log.decision_noise = count_noise(decision_assign);
  log.actual_evaluations = actual;
  log.theoretical_evaluations = theoretical;
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  history_.push_back(log);

  ++generation_;
}

CoevoSnapshot Coevolution::snapshot() const {
  CoevoSnapshot s;
  s.generation = generation_;
  s.cma = cma_.snapshot();
  s.gp_trees.reserve(gp_pop_.individuals.size());
  for (const auto& tree : gp_pop_.individuals) s.gp_trees.push_back(serialize_tree(*tree));
  s.gp_generation = gp_pop_.generation;
  s.rng_cma = rng_cma_.state();
  s.rng_gp = rng_gp_.state();
  s.actual_evaluations = actual_evaluations_;
  s.theoretical_evaluations = theoretical_evaluations_;
  if (best_.valid()) {
    s.best_params = best_.vision_params;
    s.best_tree = serialize_tree(*best_.tree);
    s.best_fitness = best_.fitness;
    s.best_generation = best_.generation;
  }
  s.history = history_;
  return s;
}

Coevolution Coevolution::restore(const CoevoConfig& cfg, const CoevoSnapshot& snap) {
  Coevolution out(cfg);
  out.generation_ = snap.generation;
  out.cma_ = CmaEs::restore(snap.cma);
  out.gp_pop_.individuals.clear();
  for (const auto& text : snap.gp_trees) out.gp_pop_.individuals.push_back(parse_tree(text));
  out.gp_pop_.generation = snap.gp_generation;
  out.rng_cma_.set_state(snap.rng_cma);
  out.rng_gp_.set_state(snap.rng_gp);
  out.actual_evaluations_ = snap.actual_evaluations;
  out.theoretical_evaluations_ = snap.theoretical_evaluations;
  if (!snap.best_tree.empty()) {
    out.best_.vision_params = snap.best_params;
    out.best_.tree = parse_tree(snap.best_tree);
    out.best_.fitness = snap.best_fitness;
    out.best_.generation = snap.best_generation;
  }
  out.history_ = snap.history;
  return out;
}

}  // namespace evopipe
