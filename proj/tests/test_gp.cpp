#include <doctest.h>

#include <stdexcept>

#include <map>

#include "evopipe/gp.hpp"

using namespace evopipe;

namespace {

void check_valid(const TreeNode& t, const GpConfig& cfg) {
  CHECK_NOTHROW(validate(t, cfg.max_tree_depth, cfg.max_condition_depth, cfg.variable_arity, cfg.action_count));
}

}  // namespace

TEST_CASE("init_population respects depth limits and determinism") {
  GpConfig cfg;

  SUBCASE("max depth 0 forces pure leaves") {
    cfg.max_tree_depth = 0;
    Rng rng(31);
    const GpPopulation pop = init_population(cfg, rng);
    for (const auto& t : pop.individuals) CHECK(t->leaf);
  }

  SUBCASE("default config yields 50 valid trees") {
    Rng rng(32);
    const GpPopulation pop = init_population(cfg, rng);
    CHECK(pop.individuals.size() == 50);
    for (const auto& t : pop.individuals) {
      check_valid(*t, cfg);
      CHECK(tree_depth(*t) <= 4);
    }
  }

  SUBCASE("same seed gives identical populations") {
    Rng a(33), b(33);
    const GpPopulation pa = init_population(cfg, a);
    const GpPopulation pb = init_population(cfg, b);
    for (std::size_t i = 0; i < pa.individuals.size(); ++i) CHECK(equal(*pa.individuals[i], *pb.individuals[i]));
  }
}

TEST_CASE("mutate keeps trees valid, leaf-only trees included") {
  GpConfig cfg;
  Rng rng(34);

  const auto leaf = TreeNode::make_leaf(1);
  for (int i = 0; i < 200; ++i) {
    const auto child = mutate(*leaf, cfg, rng);
    check_valid(*child, cfg);
  }

  // Property sweep: thousands of mutations from random starting points,
  // zero validator failures.
  for (int i = 0; i < 500; ++i) {
    auto tree = random_tree(cfg, rng);
    for (int m = 0; m < 20; ++m) {
      tree = mutate(*tree, cfg, rng);
      check_valid(*tree, cfg);
    }
  }
}

TEST_CASE("constant perturbation adds gaussian noise with sigma 5") {
  GpConfig cfg;
  // Degenerate constant range: every regrown constant is exactly 5, so any
  // other constant value must come from the perturbation operator.
  cfg.constant_min = cfg.constant_max = 5.0;
  Rng rng(35);
  const auto tree = TreeNode::make_condition(
      Comparison::make(CmpOp::Less, Expr::variable(0), Expr::constant(5.0)), TreeNode::make_leaf(0),
      TreeNode::make_leaf(1));

  std::vector<double> deltas;
  for (int i = 0; i < 20000 && deltas.size() < 2000; ++i) {
    const auto child = mutate(*tree, cfg, rng);
    if (child->leaf || child->test->rhs->kind != Expr::Kind::Constant) continue;
    if (child->test->rhs->value != 5.0) deltas.push_back(child->test->rhs->value - 5.0);
  }
  REQUIRE(deltas.size() >= 500);
  double mean = 0.0, var = 0.0;
  for (double d : deltas) mean += d;
  mean /= static_cast<double>(deltas.size());
  for (double d : deltas) var += (d - mean) * (d - mean);
  var /= static_cast<double>(deltas.size() - 1);
  CHECK(std::abs(mean) < 1.0);
  CHECK(var == doctest::Approx(25.0).epsilon(0.25));
}

TEST_CASE("tournament selection rules") {
  GpConfig cfg;
  cfg.population_size = 8;
  cfg.tournament_size = 8;
  Rng rng(36);
  GpPopulation pop;
  for (int i = 0; i < 8; ++i) pop.individuals.push_back(TreeNode::make_leaf(0));

  SUBCASE("all equal fitness: winner is the minimum sampled index") {
    const std::vector<double> fitness(8, 1.0);
    for (int i = 0; i < 100; ++i) {
      Rng probe(static_cast<std::uint64_t>(i) + 100);
      Rng replay(static_cast<std::uint64_t>(i) + 100);
      int min_idx = 8;
      for (int d = 0; d < 8; ++d) min_idx = std::min(min_idx, static_cast<int>(probe.uniform_int(0, 7)));
      CHECK(tournament_select(pop, fitness, cfg, replay) == min_idx);
    }
  }

  SUBCASE("an infinite-fitness individual wins whenever sampled") {
    std::vector<double> fitness(8, 0.0);
    fitness[5] = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 200; ++i) {
      Rng probe(static_cast<std::uint64_t>(i) + 500);
      Rng replay(static_cast<std::uint64_t>(i) + 500);
      bool sampled = false;
      int min_idx = 8;
      for (int d = 0; d < 8; ++d) {
        const int idx = static_cast<int>(probe.uniform_int(0, 7));
        sampled |= idx == 5;
        min_idx = std::min(min_idx, idx);
      }
      const int winner = tournament_select(pop, fitness, cfg, replay);
      CHECK(winner == (sampled ? 5 : min_idx));
    }
  }

  SUBCASE("winner distribution dominates uniform when fitness = index") {
    cfg.population_size = 16;
    cfg.tournament_size = 10;
    GpPopulation big;
    for (int i = 0; i < 16; ++i) big.individuals.push_back(TreeNode::make_leaf(0));
    std::vector<double> fitness(16);
    for (int i = 0; i < 16; ++i) fitness[static_cast<std::size_t>(i)] = i;

    std::map<int, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ++counts[tournament_select(big, fitness, cfg, rng)];

    // Empirical CDF of the winner index must sit below the uniform CDF:
    // max of 10 uniform draws stochastically dominates a single draw.
    double cdf = 0.0;
    for (int i = 0; i < 15; ++i) {
      cdf += static_cast<double>(counts[i]) / draws;
      const double uniform_cdf = static_cast<double>(i + 1) / 16.0;
      CHECK(cdf <= uniform_cdf + 0.02);
    }
  }
}

TEST_CASE("next_generation preserves the elite and population size") {
  GpConfig cfg;
  cfg.population_size = 20;
  cfg.tournament_size = 5;
  Rng rng(37);
  GpPopulation pop = init_population(cfg, rng);

  std::vector<double> fitness(20, 0.0);
  fitness[7] = 10.0;
  const std::string elite = serialize_tree(*pop.individuals[7]);

  GpPopulation next = next_generation(pop, fitness, cfg, rng);
  CHECK(next.individuals.size() == 20);
  CHECK(next.generation == pop.generation + 1);
  CHECK(serialize_tree(*next.individuals[0]) == elite);
  for (const auto& t : next.individuals) check_valid(*t, cfg);

  SUBCASE("elite tie goes to the lowest index") {
    std::vector<double> tied(20, 3.0);
    const std::string first = serialize_tree(*pop.individuals[0]);
    GpPopulation out = next_generation(pop, tied, cfg, rng);
    CHECK(serialize_tree(*out.individuals[0]) == first);
  }

  SUBCASE("closure over 100 generations") {
    std::vector<double> f(20);
    for (int g = 0; g < 100; ++g) {
      for (auto& v : f) v = rng.uniform();
      pop = next_generation(pop, f, cfg, rng);
      for (const auto& t : pop.individuals) check_valid(*t, cfg);
    }
  }
}

TEST_CASE("config validation") {
  GpConfig cfg;
  CHECK_NOTHROW(validate_config(cfg));
  cfg.crossover_probability = 0.5;
  CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
  cfg.crossover_probability = 0.0;
  cfg.tournament_size = 100;
  CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
}
