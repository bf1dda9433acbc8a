#include <doctest.h>

#include <stdexcept>

#include "evopipe/coevo.hpp"

using namespace evopipe;

namespace {

CoevoConfig small_config() {
  CoevoConfig cfg;
  cfg.generations = 2;
  cfg.episodes = 2;
  cfg.cma_population = 6;
  cfg.gp.population_size = 6;
  cfg.gp.tournament_size = 3;
  cfg.n_vm = 6;
  cfg.n_dm = 12;
  cfg.env.points_to_win = 2;
  cfg.master_seed = 9;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TEST_CASE("fitness_from_matrix row and column maxima") {
  FitnessMatrix m;
  m.vision_reps = {0, 1};
  m.decision_reps = {0, 1};
  m.scores = {1.0, 2.0, 3.0, 0.0};
  const auto [vision, decision] = fitness_from_matrix(m);
  CHECK(vision == std::vector<double>{2.0, 3.0});
  CHECK(decision == std::vector<double>{3.0, 2.0});

  FitnessMatrix single;
  single.vision_reps = {0};
  single.decision_reps = {0};
  single.scores = {5.0};
  const auto [v1, d1] = fitness_from_matrix(single);
  CHECK(v1 == std::vector<double>{5.0});
  CHECK(d1 == std::vector<double>{5.0});

  FitnessMatrix constant;
  constant.vision_reps = {0, 1, 2};
  constant.decision_reps = {0, 1};
  constant.scores.assign(6, 4.5);
  const auto [vc, dc] = fitness_from_matrix(constant);
  for (double v : vc) CHECK(v == 4.5);
  for (double v : dc) CHECK(v == 4.5);

  FitnessMatrix empty;
  CHECK_THROWS_AS(fitness_from_matrix(empty), std::invalid_argument);
}

TEST_CASE("fitness_from_matrix against a direct scan on random matrices") {
  Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    FitnessMatrix m;
    const int rows = static_cast<int>(rng.uniform_int(1, 8));
    const int cols = static_cast<int>(rng.uniform_int(1, 8));
    for (int i = 0; i < rows; ++i) m.vision_reps.push_back(i);
    for (int j = 0; j < cols; ++j) m.decision_reps.push_back(j);
    m.scores.resize(static_cast<std::size_t>(rows) * cols);
    for (auto& s : m.scores) s = rng.uniform(-21.0, 21.0);

    const auto [vision, decision] = fitness_from_matrix(m);
    for (int i = 0; i < rows; ++i) {
      double best = -1e300;
      for (int j = 0; j < cols; ++j) best = std::max(best, m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      CHECK(vision[static_cast<std::size_t>(i)] == best);
    }
    for (int j = 0; j < cols; ++j) {
      double best = -1e300;
      for (int i = 0; i < rows; ++i) best = std::max(best, m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      CHECK(decision[static_cast<std::size_t>(j)] == best);
    }

    // Positive scaling keeps fitnesses proportional and argmaxes unchanged.
    FitnessMatrix scaled = m;
    for (auto& s : scaled.scores) s *= 3.0;
    const auto [vs, ds] = fitness_from_matrix(scaled);
    for (std::size_t i = 0; i < vision.size(); ++i) CHECK(vs[i] == doctest::Approx(3.0 * vision[i]));
    for (std::size_t j = 0; j < decision.size(); ++j) CHECK(ds[j] == doctest::Approx(3.0 * decision[j]));
  }
}

TEST_CASE("mean aggregation variant") {
  FitnessMatrix m;
  m.vision_reps = {0, 1};
  m.decision_reps = {0, 1};
  m.scores = {1.0, 3.0, 5.0, 7.0};
  const auto [vision, decision] = fitness_from_matrix(m, FitnessAggregation::Mean);
  CHECK(vision == std::vector<double>{2.0, 6.0});
  CHECK(decision == std::vector<double>{3.0, 5.0});
}

TEST_CASE("evaluate_pair is deterministic and e=1 equals the single episode") {
  EnvConfig env;
  env.points_to_win = 2;
  Rng rng(62);
  std::vector<double> params(150);
  for (auto& p : params) p = rng.normal(0.0, 0.1);
  const VisionModule vm = from_parameters(params, 2, 5, 5);
  const auto tree = TreeNode::make_condition(
      Comparison::make(CmpOp::Less, Expr::variable(3), Expr::variable(1)), TreeNode::make_leaf(2),
      TreeNode::make_leaf(3));

  const std::vector<std::uint64_t> seeds{11, 22, 33};
  const double a = evaluate_pair(vm, *tree, env, seeds);
  const double b = evaluate_pair(vm, *tree, env, seeds);
  CHECK(a == b);

  const std::vector<std::uint64_t> one{11};
  CHECK(evaluate_pair(vm, *tree, env, one) == evaluate_episodes(vm, *tree, env, one)[0]);

  const double mean3 =
      (evaluate_episodes(vm, *tree, env, {&seeds[0], 1})[0] + evaluate_episodes(vm, *tree, env, {&seeds[1], 1})[0] +
       evaluate_episodes(vm, *tree, env, {&seeds[2], 1})[0]) /
      3.0;
  CHECK(a == doctest::Approx(mean3).epsilon(1e-12));
}

TEST_CASE("constant-NOP tree scores at most zero") {
  EnvConfig env;
  env.points_to_win = 5;
  const VisionModule vm = from_parameters(std::vector<double>(150, 0.0), 2, 5, 5);
  const auto nop = TreeNode::make_leaf(0);
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  CHECK(evaluate_pair(vm, *nop, env, seeds) <= 0.0);
}

TEST_CASE("clustering disabled evaluates every pairing") {
  CoevoConfig cfg = small_config();
  cfg.clustering_enabled = false;
  cfg.generations = 1;
  Coevolution evo(cfg);
  evo.generation_step();
  CHECK(evo.history().size() == 1);
  const GenerationLog& g = evo.history()[0];
  CHECK(g.actual_evaluations == 6 * 6 * 2);
  CHECK(g.theoretical_evaluations == 6 * 6 * 2);
  CHECK(g.actual_evaluations == evo.actual_evaluations());
}

TEST_CASE("identical vision candidates collapse to one representative") {
  CoevoConfig cfg = small_config();
  // Sampling noise of 1e-12 around a solid positive mean cannot move any
  // argmax, so all candidates behave identically.
  cfg.cma_initial_sigma = 1e-12;
  cfg.cma_initial_mean = 0.5;
  cfg.generations = 1;
  Coevolution evo(cfg);
  evo.generation_step();
  const GenerationLog& g = evo.history()[0];
  CHECK(g.vision_clusters == 1);
  CHECK(g.vision_noise == 0);
  const int decision_reps = g.decision_clusters + g.decision_noise;
  CHECK(g.actual_evaluations == 1L * decision_reps * cfg.episodes);
}

TEST_CASE("same seed replays produce identical histories, any worker count") {
  CoevoConfig cfg = small_config();
  Coevolution a(cfg);
  cfg.workers = 4;
  Coevolution b(cfg);
  for (int i = 0; i < cfg.generations; ++i) {
    a.generation_step();
    b.generation_step();
  }
  REQUIRE(a.history().size() == b.history().size());
  for (std::size_t i = 0; i < a.history().size(); ++i) {
    CHECK(a.history()[i].best_fitness == b.history()[i].best_fitness);
    CHECK(a.history()[i].mean_fitness == b.history()[i].mean_fitness);
    CHECK(a.history()[i].best_so_far == b.history()[i].best_so_far);
    CHECK(a.history()[i].actual_evaluations == b.history()[i].actual_evaluations);
  }
  CHECK(a.best().fitness == b.best().fitness);
  CHECK(serialize_tree(*a.best().tree) == serialize_tree(*b.best().tree));
  CHECK(a.best().vision_params == b.best().vision_params);
}

TEST_CASE("best-so-far fitness is non-decreasing") {
  CoevoConfig cfg = small_config();
  cfg.generations = 4;
  Coevolution evo(cfg);
  double prev = -1e300;
  while (!evo.finished()) {
    evo.generation_step();
    CHECK(evo.history().back().best_so_far >= prev);
    prev = evo.history().back().best_so_far;
  }
  CHECK(evo.best().valid());
  CHECK(evo.best().fitness == prev);
}

TEST_CASE("snapshot restore resumes the exact trajectory") {
  CoevoConfig cfg = small_config();
  cfg.generations = 4;

  Coevolution full(cfg);
  for (int i = 0; i < 4; ++i) full.generation_step();

  Coevolution half(cfg);
  half.generation_step();
  half.generation_step();
  const CoevoSnapshot snap = half.snapshot();
  Coevolution resumed = Coevolution::restore(cfg, snap);
  resumed.generation_step();
  resumed.generation_step();

  REQUIRE(resumed.history().size() == full.history().size());
  for (std::size_t i = 0; i < full.history().size(); ++i) {
    CHECK(resumed.history()[i].best_fitness == full.history()[i].best_fitness);
    CHECK(resumed.history()[i].mean_fitness == full.history()[i].mean_fitness);
    CHECK(resumed.history()[i].actual_evaluations == full.history()[i].actual_evaluations);
  }
  CHECK(resumed.best().fitness == full.best().fitness);
  CHECK(serialize_tree(*resumed.best().tree) == serialize_tree(*full.best().tree));
  CHECK(resumed.cma().mean() == full.cma().mean());
  CHECK(resumed.cma().sigma() == full.cma().sigma());
}

TEST_CASE("heldout seeds are disjoint from training episode seeds") {
  const auto heldout = Coevolution::heldout_seeds(9, 100);
  CHECK(heldout.size() == 100);
  // All distinct.
  auto sorted = heldout;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}
