#include "evopipe/gp.hpp"

#include <algorithm>
#include <stdexcept>

namespace evopipe {

void validate_config(const GpConfig& cfg) {
  if (cfg.population_size < 1) throw std::invalid_argument("gp: population_size must be >= 1");
  if (cfg.tournament_size < 1 || cfg.tournament_size > cfg.population_size)
    throw std::invalid_argument("gp: need 1 <= tournament_size <= population_size");
  if (cfg.elites < 0 || cfg.elites >= cfg.population_size)
    throw std::invalid_argument("gp: need 0 <= elites < population_size");
  if (cfg.crossover_probability != 0.0)
    throw std::invalid_argument("gp: crossover is not implemented; crossover_probability must be 0");
  if (cfg.mutation_probability < 0.0 || cfg.mutation_probability > 1.0)
    throw std::invalid_argument("gp: mutation_probability must be in [0, 1]");
  if (cfg.max_tree_depth < 0 || cfg.max_condition_depth < 0)
    throw std::invalid_argument("gp: depth limits must be non-negative");
  if (cfg.action_count < 1) throw std::invalid_argument("gp: action_count must be >= 1");
  if (cfg.variable_arity < 1) throw std::invalid_argument("gp: variable_arity must be >= 1");
  if (!(cfg.constant_min <= cfg.constant_max)) throw std::invalid_argument("gp: empty constant_range");
}

namespace {

std::unique_ptr<Expr> grow_expr(const GpConfig& cfg, Rng& rng, int depth) {
  const double p_terminal = static_cast<double>(depth + 1) / (cfg.max_condition_depth + 1);
  if (rng.uniform() < p_terminal) {
    if (rng.bernoulli(0.5)) return Expr::variable(static_cast<int>(rng.uniform_int(0, cfg.variable_arity - 1)));
    return Expr::constant(rng.uniform(cfg.constant_min, cfg.constant_max));
  }
  const auto op = static_cast<ArithOp>(rng.uniform_int(0, 3));
  auto lhs = grow_expr(cfg, rng, depth + 1);
  auto rhs = grow_expr(cfg, rng, depth + 1);
  return Expr::arith(op, std::move(lhs), std::move(rhs));
}

std::unique_ptr<Comparison> grow_comparison(const GpConfig& cfg, Rng& rng) {
  const auto op = static_cast<CmpOp>(rng.uniform_int(0, 2));
  auto lhs = grow_expr(cfg, rng, 0);
  auto rhs = grow_expr(cfg, rng, 0);
  return Comparison::make(op, std::move(lhs), std::move(rhs));
}

std::unique_ptr<TreeNode> grow_tree(const GpConfig& cfg, Rng& rng, int depth) {
  const double p_leaf = static_cast<double>(depth + 1) / (cfg.max_tree_depth + 1);
  if (rng.uniform() < p_leaf) return TreeNode::make_leaf(static_cast<int>(rng.uniform_int(0, cfg.action_count - 1)));
  auto test = grow_comparison(cfg, rng);
  auto t = grow_tree(cfg, rng, depth + 1);
  auto f = grow_tree(cfg, rng, depth + 1);
  return TreeNode::make_condition(std::move(test), std::move(t), std::move(f));
}

}  // namespace

std::unique_ptr<Expr> random_expr(const GpConfig& cfg, Rng& rng, int depth_budget) {
  return grow_expr(cfg, rng, cfg.max_condition_depth - depth_budget);
}

std::unique_ptr<TreeNode> random_tree(const GpConfig& cfg, Rng& rng) { return grow_tree(cfg, rng, 0); }

GpPopulation init_population(const GpConfig& cfg, Rng& rng) {
  GpPopulation pop;
  pop.individuals.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int i = 0; i < cfg.population_size; ++i) pop.individuals.push_back(random_tree(cfg, rng));
  return pop;
}

namespace {

// Mutation sites, gathered by kind so the operators can pick uniformly.
struct Sites {
  std::vector<std::pair<TreeNode*, int>> tree_nodes;  // node, nesting depth
  std::vector<TreeNode*> leaves;
  std::vector<Comparison*> comparisons;
  std::vector<std::pair<Expr*, int>> exprs;  // node, expression depth
  std::vector<Expr*> arith_nodes;
  std::vector<Expr*> constants;
};

void collect_expr(Expr* e, int depth, Sites& s) {
  s.exprs.emplace_back(e, depth);
  switch (e->kind) {
    case Expr::Kind::Constant:
      s.constants.push_back(e);
      break;
    case Expr::Kind::Variable:
      break;
    case Expr::Kind::Arith:
      s.arith_nodes.push_back(e);
      collect_expr(e->lhs.get(), depth + 1, s);
      collect_expr(e->rhs.get(), depth + 1, s);
      break;
  }
}

void collect_tree(TreeNode* t, int depth, Sites& s) {
  s.tree_nodes.emplace_back(t, depth);
  if (t->leaf) {
    s.leaves.push_back(t);
    return;
  }
  s.comparisons.push_back(t->test.get());
  collect_expr(t->test->lhs.get(), 0, s);
  collect_expr(t->test->rhs.get(), 0, s);
  collect_tree(t->if_true.get(), depth + 1, s);
  collect_tree(t->if_false.get(), depth + 1, s);
}

enum class MutationOp { SubtreeReplacement, PointMutation, ConstantPerturbation, ActionResample };

void apply_subtree_replacement(const GpConfig& cfg, Rng& rng, Sites& s) {
  // Loci: tree nodes, comparisons and expression nodes, all regrown typed
  // within the depth budget remaining at that position.
  const std::size_t total = s.tree_nodes.size() + s.comparisons.size() + s.exprs.size();
  std::size_t pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(total) - 1));
  if (pick < s.tree_nodes.size()) {
    auto [node, depth] = s.tree_nodes[pick];
    GpConfig local = cfg;
    local.max_tree_depth = cfg.max_tree_depth - depth;
    *node = std::move(*grow_tree(local, rng, 0));
    return;
  }
  pick -= s.tree_nodes.size();
  if (pick < s.comparisons.size()) {
    *s.comparisons[pick] = std::move(*grow_comparison(cfg, rng));
    return;
  }
  pick -= s.comparisons.size();
  auto [expr, depth] = s.exprs[pick];
  *expr = std::move(*grow_expr(cfg, rng, depth));
}

void apply_point_mutation(Rng& rng, Sites& s) {
  const std::size_t total = s.comparisons.size() + s.arith_nodes.size();
  std::size_t pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(total) - 1));
  if (pick < s.comparisons.size()) {
    Comparison* c = s.comparisons[pick];
    const int shift = static_cast<int>(rng.uniform_int(1, 2));
    c->op = static_cast<CmpOp>((static_cast<int>(c->op) + shift) % 3);
    return;
  }
  pick -= s.comparisons.size();
  Expr* e = s.arith_nodes[pick];
  const int shift = static_cast<int>(rng.uniform_int(1, 3));
  e->op = static_cast<ArithOp>((static_cast<int>(e->op) + shift) % 4);
}

}  // namespace

std::unique_ptr<TreeNode> mutate(const TreeNode& tree, const GpConfig& cfg, Rng& rng) {
  auto out = tree.clone();
  Sites s;
  collect_tree(out.get(), 0, s);

  std::vector<MutationOp> applicable{MutationOp::SubtreeReplacement};
  if (!s.comparisons.empty() || !s.arith_nodes.empty()) applicable.push_back(MutationOp::PointMutation);
  if (!s.constants.empty()) applicable.push_back(MutationOp::ConstantPerturbation);
  applicable.push_back(MutationOp::ActionResample);

  const auto op = applicable[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(applicable.size()) - 1))];
  switch (op) {
    case MutationOp::SubtreeReplacement:
      apply_subtree_replacement(cfg, rng, s);
      break;
    case MutationOp::PointMutation:
      apply_point_mutation(rng, s);
      break;
    case MutationOp::ConstantPerturbation: {
      Expr* c = s.constants[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(s.constants.size()) - 1))];
      c->value += rng.normal(0.0, 5.0);
      break;
    }
    case MutationOp::ActionResample: {
      TreeNode* leaf =
          s.leaves[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(s.leaves.size()) - 1))];
      leaf->action = static_cast<int>(rng.uniform_int(0, cfg.action_count - 1));
      break;
    }
  }
  return out;
}

int tournament_select(const GpPopulation& pop, std::span<const double> fitness, const GpConfig& cfg, Rng& rng) {
  if (fitness.size() != pop.individuals.size())
    throw std::invalid_argument("tournament_select: fitness length must equal population size");
  int best = -1;
  for (int i = 0; i < cfg.tournament_size; ++i) {
    const int idx = static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(pop.individuals.size()) - 1));
    if (best < 0 || fitness[static_cast<std::size_t>(idx)] > fitness[static_cast<std::size_t>(best)] ||
        (fitness[static_cast<std::size_t>(idx)] == fitness[static_cast<std::size_t>(best)] && idx < best))
      best = idx;
  }
  return best;
}

GpPopulation next_generation(const GpPopulation& pop, std::span<const double> fitness, const GpConfig& cfg,
                             Rng& rng) {
  validate_config(cfg);
  if (fitness.size() != pop.individuals.size())
    throw std::invalid_argument("next_generation: fitness length must equal population size");

  GpPopulation next;
  next.generation = pop.generation + 1;
  next.individuals.reserve(pop.individuals.size());

  if (cfg.elites > 0) {
    std::vector<std::size_t> order(pop.individuals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });
    for (int e = 0; e < cfg.elites; ++e)
      next.individuals.push_back(pop.individuals[order[static_cast<std::size_t>(e)]]->clone());
  }
  while (next.individuals.size() < pop.individuals.size()) {
    const int parent = tournament_select(pop, fitness, cfg, rng);
    if (rng.uniform() < cfg.mutation_probability)
      next.individuals.push_back(mutate(*pop.individuals[static_cast<std::size_t>(parent)], cfg, rng));
    else
      next.individuals.push_back(pop.individuals[static_cast<std::size_t>(parent)]->clone());
  }
  return next;
}

}  // namespace evopipe
