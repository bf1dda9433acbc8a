#include "evopipe/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace evopipe {

std::unique_ptr<Expr> Expr::constant(double v) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Constant;
  e->value = v;
  return e;
}

std::unique_ptr<Expr> Expr::variable(int index) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Variable;
  e->index = index;
  return e;
}

std::unique_ptr<Expr> Expr::arith(ArithOp op, std::unique_ptr<Expr> lhs, std::unique_ptr<Expr> rhs) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Arith;
  e->op = op;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

std::unique_ptr<Expr> Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->value = value;
  e->index = index;
  e->op = op;
  if (lhs) e->lhs = lhs->clone();
  if (rhs) e->rhs = rhs->clone();
  return e;
}

std::unique_ptr<Comparison> Comparison::make(CmpOp op, std::unique_ptr<Expr> lhs, std::unique_ptr<Expr> rhs) {
  auto c = std::make_unique<Comparison>();
  c->op = op;
  c->lhs = std::move(lhs);
  c->rhs = std::move(rhs);
  return c;
}

std::unique_ptr<Comparison> Comparison::clone() const {
  return Comparison::make(op, lhs->clone(), rhs->clone());
}

std::unique_ptr<TreeNode> TreeNode::make_leaf(int action) {
  auto t = std::make_unique<TreeNode>();
  t->leaf = true;
  t->action = action;
  return t;
}

std::unique_ptr<TreeNode> TreeNode::make_condition(std::unique_ptr<Comparison> test, std::unique_ptr<TreeNode> t,
                                                   std::unique_ptr<TreeNode> f) {
  auto n = std::make_unique<TreeNode>();
  n->leaf = false;
  n->test = std::move(test);
  n->if_true = std::move(t);
  n->if_false = std::move(f);
  return n;
}

std::unique_ptr<TreeNode> TreeNode::clone() const {
  if (leaf) return make_leaf(action);
  return make_condition(test->clone(), if_true->clone(), if_false->clone());
}

double evaluate_expr(const Expr& e, std::span<const double> inputs) {
  switch (e.kind) {
    case Expr::Kind::Constant:
      return e.value;
    case Expr::Kind::Variable:
      return inputs[static_cast<std::size_t>(e.index)];
    case Expr::Kind::Arith: {
      const double l = evaluate_expr(*e.lhs, inputs);
      const double r = evaluate_expr(*e.rhs, inputs);
      switch (e.op) {
        case ArithOp::Add:
          return l + r;
        case ArithOp::Sub:
          return l - r;
        case ArithOp::Mul:
          return l * r;
        case ArithOp::Div:
          return std::abs(r) < kProtectedDivEpsilon ? 1.0 : l / r;
      }
    }
  }
  return 0.0;
}

bool evaluate_comparison(const Comparison& c, std::span<const double> inputs) {
  const double l = evaluate_expr(*c.lhs, inputs);
  const double r = evaluate_expr(*c.rhs, inputs);
  switch (c.op) {
    case CmpOp::Less:
      return l < r;
    case CmpOp::Equal:
      return l == r;
    case CmpOp::Greater:
      return l > r;
  }
  return false;
}

int evaluate(const TreeNode& tree, std::span<const double> inputs) {
  const TreeNode* node = &tree;
  while (!node->leaf) node = evaluate_comparison(*node->test, inputs) ? node->if_true.get() : node->if_false.get();
  return node->action;
}

int expr_depth(const Expr& e) {
  if (e.kind != Expr::Kind::Arith) return 0;
  return 1 + std::max(expr_depth(*e.lhs), expr_depth(*e.rhs));
}

int tree_depth(const TreeNode& t) {
  if (t.leaf) return 0;
  return 1 + std::max(tree_depth(*t.if_true), tree_depth(*t.if_false));
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Constant:
      return a.value == b.value;
    case Expr::Kind::Variable:
      return a.index == b.index;
    case Expr::Kind::Arith:
      return a.op == b.op && equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
  }
  return false;
}

bool equal(const TreeNode& a, const TreeNode& b) {
  if (a.leaf != b.leaf) return false;
  if (a.leaf) return a.action == b.action;
  return a.test->op == b.test->op && equal(*a.test->lhs, *b.test->lhs) && equal(*a.test->rhs, *b.test->rhs) &&
         equal(*a.if_true, *b.if_true) && equal(*a.if_false, *b.if_false);
}

namespace {

void validate_expr(const Expr& e, int max_condition_depth, int variable_arity) {
  if (expr_depth(e) > max_condition_depth) throw std::invalid_argument("tree validator: expression depth exceeded");
  switch (e.kind) {
    case Expr::Kind::Constant:
      if (!std::isfinite(e.value)) throw std::invalid_argument("tree validator: non-finite constant");
      break;
    case Expr::Kind::Variable:
      if (e.index < 0 || e.index >= variable_arity)
        throw std::invalid_argument("tree validator: variable index out of range");
      break;
    case Expr::Kind::Arith:
      if (!e.lhs || !e.rhs) throw std::invalid_argument("tree validator: arithmetic node missing children");
      validate_expr(*e.lhs, max_condition_depth, variable_arity);
      validate_expr(*e.rhs, max_condition_depth, variable_arity);
      break;
  }
}

}  // namespace

void validate(const TreeNode& t, int max_tree_depth, int max_condition_depth, int variable_arity,
              int action_count) {
  if (t.leaf) {
    if (t.action < 0 || t.action >= action_count)
      throw std::invalid_argument("tree validator: leaf action out of range");
    return;
  }
  if (tree_depth(t) > max_tree_depth) throw std::invalid_argument("tree validator: tree depth exceeded");
  if (!t.test || !t.test->lhs || !t.test->rhs || !t.if_true || !t.if_false)
    throw std::invalid_argument("tree validator: malformed condition node");
  validate_expr(*t.test->lhs, max_condition_depth, variable_arity);
  validate_expr(*t.test->rhs, max_condition_depth, variable_arity);
  validate(*t.if_true, max_tree_depth - 1, max_condition_depth, variable_arity, action_count);
  validate(*t.if_false, max_tree_depth - 1, max_condition_depth, variable_arity, action_count);
}

namespace {

void profile_expr(const Expr& e, ComplexityProfile& p) {
  p.symbols += 1;
  if (e.kind == Expr::Kind::Arith) {
    p.operations += 1;
    profile_expr(*e.lhs, p);
    profile_expr(*e.rhs, p);
  }
}

void profile_tree(const TreeNode& t, ComplexityProfile& p, int nesting) {
  p.symbols += 1;
  if (t.leaf) {
    p.max_condition_nesting = std::max(p.max_condition_nesting, nesting);
    return;
  }
  p.operations += 2;  // the condition and its comparison
  p.non_arith_operations += 2;
  p.symbols += 1;  // the comparison node
  profile_expr(*t.test->lhs, p);
  profile_expr(*t.test->rhs, p);
  profile_tree(*t.if_true, p, nesting + 1);
  profile_tree(*t.if_false, p, nesting + 1);
}

}  // namespace

ComplexityProfile complexity_profile(const TreeNode& t) {
  ComplexityProfile p;
  profile_tree(t, p, 0);
  return p;
}

double m_prime(const ComplexityProfile& p) {
  return -0.2 + 0.2 * p.symbols + 0.5 * p.operations + 3.4 * p.non_arith_operations +
         4.5 * p.max_condition_nesting;
}

double m_score(const ComplexityProfile& p) {
  return 79.1 - 0.2 * p.symbols - 0.5 * p.operations - 3.4 * p.non_arith_operations -
         4.5 * p.max_condition_nesting;
}

namespace {

// Affine view of an expression: value = constant + sum coeff[i] * x_i.
struct Affine {
  std::vector<double> coeff;
  double constant = 0.0;

  bool is_constant() const {
    return std::all_of(coeff.begin(), coeff.end(), [](double c) { return c == 0.0; });
  }
};

std::optional<Affine> to_affine(const Expr& e, int arity) {
  switch (e.kind) {
    case Expr::Kind::Constant: {
      Affine a;
      a.coeff.assign(static_cast<std::size_t>(arity), 0.0);
      a.constant = e.value;
      return a;
    }
    case Expr::Kind::Variable: {
      Affine a;
      a.coeff.assign(static_cast<std::size_t>(arity), 0.0);
      a.coeff[static_cast<std::size_t>(e.index)] = 1.0;
      return a;
    }
    case Expr::Kind::Arith: {
      auto l = to_affine(*e.lhs, arity);
      auto r = to_affine(*e.rhs, arity);
      if (!l || !r) return std::nullopt;
      Affine a;
      a.coeff.assign(static_cast<std::size_t>(arity), 0.0);
      switch (e.op) {
        case ArithOp::Add:
        case ArithOp::Sub: {
          const double s = e.op == ArithOp::Add ? 1.0 : -1.0;
          for (int i = 0; i < arity; ++i) a.coeff[static_cast<std::size_t>(i)] = l->coeff[i] + s * r->coeff[i];
          a.constant = l->constant + s * r->constant;
          return a;
        }
        case ArithOp::Mul: {
          if (r->is_constant()) {
            for (int i = 0; i < arity; ++i) a.coeff[static_cast<std::size_t>(i)] = l->coeff[i] * r->constant;
            a.constant = l->constant * r->constant;
            return a;
          }
          if (l->is_constant()) {
            for (int i = 0; i < arity; ++i) a.coeff[static_cast<std::size_t>(i)] = r->coeff[i] * l->constant;
            a.constant = r->constant * l->constant;
            return a;
          }
          return std::nullopt;
        }
        case ArithOp::Div: {
          if (!r->is_constant()) return std::nullopt;
          if (std::abs(r->constant) < kProtectedDivEpsilon) {
            a.constant = 1.0;  // protected division collapses to the constant 1
            return a;
          }
          for (int i = 0; i < arity; ++i) a.coeff[static_cast<std::size_t>(i)] = l->coeff[i] / r->constant;
          a.constant = l->constant / r->constant;
          return a;
        }
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval affine_range(const Affine& a, std::span<const VariableDomain> domain) {
  Interval r{a.constant, a.constant};
  for (std::size_t i = 0; i < a.coeff.size(); ++i) {
    const double c = a.coeff[i];
    if (c >= 0.0) {
      r.lo += c * domain[i].lo;
      r.hi += c * domain[i].hi;
    } else {
      r.lo += c * domain[i].hi;
      r.hi += c * domain[i].lo;
    }
  }
  return r;
}

constexpr int kLatticePointsPerVariable = 9;

std::vector<double> lattice_points(const VariableDomain& d) {
  std::vector<double> pts;
  const int span = d.hi - d.lo;
  const int count = std::min(span + 1, kLatticePointsPerVariable);
  for (int i = 0; i < count; ++i) {
    const int v = count > 1 ? d.lo + static_cast<int>(std::lround(static_cast<double>(i) * span / (count - 1)))
                            : d.lo;
    if (pts.empty() || static_cast<double>(v) != pts.back()) pts.push_back(static_cast<double>(v));
  }
  return pts;
}

template <typename Fn>
void for_each_lattice_point(std::span<const VariableDomain> domain, Fn&& fn) {
  const std::size_t arity = domain.size();
  std::vector<std::vector<double>> axes(arity);
  for (std::size_t i = 0; i < arity; ++i) axes[i] = lattice_points(domain[i]);
  std::vector<std::size_t> idx(arity, 0);
  std::vector<double> point(arity);
  while (true) {
    for (std::size_t i = 0; i < arity; ++i) point[i] = axes[i][idx[i]];
    fn(point);
    std::size_t i = 0;
    while (i < arity && ++idx[i] == axes[i].size()) idx[i++] = 0;
    if (i == arity) break;
  }
}

}  // namespace

TruthValue comparison_truth(const Comparison& c, std::span<const VariableDomain> domain) {
  bool seen_true = false, seen_false = false;
  for_each_lattice_point(domain, [&](const std::vector<double>& point) {
    (evaluate_comparison(c, point) ? seen_true : seen_false) = true;
  });
  if (seen_true && seen_false) return TruthValue::Varies;

  const int arity = static_cast<int>(domain.size());
  const auto l = to_affine(*c.lhs, arity);
  const auto r = to_affine(*c.rhs, arity);
  if (l && r) {
    Affine diff;
    diff.coeff.resize(static_cast<std::size_t>(arity));
    for (int i = 0; i < arity; ++i) diff.coeff[static_cast<std::size_t>(i)] = l->coeff[i] - r->coeff[i];
    diff.constant = l->constant - r->constant;
    const Interval range = affine_range(diff, domain);
    switch (c.op) {
      case CmpOp::Less:
        if (range.hi < 0.0) return TruthValue::AlwaysTrue;
        if (range.lo >= 0.0) return TruthValue::AlwaysFalse;
        return TruthValue::Varies;
      case CmpOp::Greater:
        if (range.lo > 0.0) return TruthValue::AlwaysTrue;
        if (range.hi <= 0.0) return TruthValue::AlwaysFalse;
        return TruthValue::Varies;
      case CmpOp::Equal:
        if (range.lo == 0.0 && range.hi == 0.0) return TruthValue::AlwaysTrue;
        if (range.lo > 0.0 || range.hi < 0.0) return TruthValue::AlwaysFalse;
        return TruthValue::Varies;
    }
  }
  return seen_true ? TruthValue::AlwaysTrue : TruthValue::AlwaysFalse;
}

std::unique_ptr<TreeNode> simplify(const TreeNode& t, std::span<const VariableDomain> domain) {
  if (t.leaf) return t.clone();
  switch (comparison_truth(*t.test, domain)) {
    case TruthValue::AlwaysTrue:
      return simplify(*t.if_true, domain);
    case TruthValue::AlwaysFalse:
      return simplify(*t.if_false, domain);
    case TruthValue::Varies:
      return TreeNode::make_condition(t.test->clone(), simplify(*t.if_true, domain),
                                      simplify(*t.if_false, domain));
  }
  return t.clone();
}

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string format_number_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string variable_name(int index, std::span<const std::string> names) {
  if (index >= 0 && static_cast<std::size_t>(index) < names.size()) return names[static_cast<std::size_t>(index)];
  return "v" + std::to_string(index);
}

std::string action_name(int action, std::span<const std::string> names) {
  if (action >= 0 && static_cast<std::size_t>(action) < names.size()) return names[static_cast<std::size_t>(action)];
  return "a" + std::to_string(action);
}

const char* arith_symbol(ArithOp op) {
  switch (op) {
    case ArithOp::Add:
      return "+";
    case ArithOp::Sub:
      return "-";
    case ArithOp::Mul:
      return "*";
    case ArithOp::Div:
      return "/";
  }
  return "?";
}

const char* cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Less:
      return "<";
    case CmpOp::Equal:
      return "==";
    case CmpOp::Greater:
      return ">";
  }
  return "?";
}

void render_tree_block(const TreeNode& t, std::span<const std::string> vars, std::span<const std::string> actions,
                       int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (t.leaf) {
    out += pad + action_name(t.action, actions) + "\n";
    return;
  }
  if (t.if_true->leaf && t.if_false->leaf) {
    out += pad + "if " + render_comparison(*t.test, vars) + " then " + action_name(t.if_true->action, actions) +
           " else " + action_name(t.if_false->action, actions);
    if (indent > 0) out += "\n";
    return;
  }
  out += pad + "if " + render_comparison(*t.test, vars) + ":\n";
  render_tree_block(*t.if_true, vars, actions, indent + 2, out);
  out += pad + "else:\n";
  render_tree_block(*t.if_false, vars, actions, indent + 2, out);
}

}  // namespace

std::string render_expr(const Expr& e, std::span<const std::string> variable_names) {
  switch (e.kind) {
    case Expr::Kind::Constant:
      return format_number(e.value);
    case Expr::Kind::Variable:
      return variable_name(e.index, variable_names);
    case Expr::Kind::Arith:
      return "(" + render_expr(*e.lhs, variable_names) + " " + arith_symbol(e.op) + " " +
             render_expr(*e.rhs, variable_names) + ")";
  }
  return "?";
}

std::string render_comparison(const Comparison& c, std::span<const std::string> variable_names) {
  return render_expr(*c.lhs, variable_names) + " " + cmp_symbol(c.op) + " " +
         render_expr(*c.rhs, variable_names);
}

std::string render_text(const TreeNode& t, std::span<const std::string> variable_names,
                        std::span<const std::string> action_names) {
  std::string out;
  render_tree_block(t, variable_names, action_names, 0, out);
  if (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

namespace {

int dot_node(const TreeNode& t, std::span<const std::string> vars, std::span<const std::string> actions,
             int& next_id, std::string& out) {
  const int id = next_id++;
  if (t.leaf) {
    out += "  n" + std::to_string(id) + " [shape=ellipse, label=\"" + action_name(t.action, actions) + "\"];\n";
    return id;
  }
  out += "  n" + std::to_string(id) + " [shape=box, label=\"" + render_comparison(*t.test, vars) + "\"];\n";
  const int t_id = dot_node(*t.if_true, vars, actions, next_id, out);
  const int f_id = dot_node(*t.if_false, vars, actions, next_id, out);
  out += "  n" + std::to_string(id) + " -> n" + std::to_string(t_id) + " [label=\"T\"];\n";
  out += "  n" + std::to_string(id) + " -> n" + std::to_string(f_id) + " [label=\"F\"];\n";
  return id;
}

}  // namespace

std::string render_dot(const TreeNode& t, std::span<const std::string> variable_names,
                       std::span<const std::string> action_names) {
  std::string out = "digraph decision_tree {\n";
  int next_id = 0;
  dot_node(t, variable_names, action_names, next_id, out);
  out += "}\n";
  return out;
}

namespace {

void serialize_expr(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Constant:
      out += "k " + format_number_exact(e.value) + " ";
      break;
    case Expr::Kind::Variable:
      out += "v " + std::to_string(e.index) + " ";
      break;
    case Expr::Kind::Arith:
      out += std::string(arith_symbol(e.op)) + " ";
      serialize_expr(*e.lhs, out);
      serialize_expr(*e.rhs, out);
      break;
  }
}

void serialize_node(const TreeNode& t, std::string& out) {
  if (t.leaf) {
    out += "L " + std::to_string(t.action) + " ";
    return;
  }
  out += "C ";
  out += std::string(cmp_symbol(t.test->op)) + " ";
  serialize_expr(*t.test->lhs, out);
  serialize_expr(*t.test->rhs, out);
  serialize_node(*t.if_true, out);
  serialize_node(*t.if_false, out);
}

std::unique_ptr<Expr> parse_expr(std::istringstream& in) {
  std::string tok;
  if (!(in >> tok)) throw std::invalid_argument("parse_tree: truncated expression");
  if (tok == "k") {
    double v = 0.0;
    if (!(in >> v)) throw std::invalid_argument("parse_tree: bad constant");
    return Expr::constant(v);
  }
  if (tok == "v") {
    int i = 0;
    if (!(in >> i)) throw std::invalid_argument("parse_tree: bad variable index");
    return Expr::variable(i);
  }
  ArithOp op;
  if (tok == "+")
    op = ArithOp::Add;
  else if (tok == "-")
    op = ArithOp::Sub;
  else if (tok == "*")
    op = ArithOp::Mul;
  else if (tok == "/")
    op = ArithOp::Div;
  else
    throw std::invalid_argument("parse_tree: unknown expression tag '" + tok + "'");
  auto lhs = parse_expr(in);
  auto rhs = parse_expr(in);
  return Expr::arith(op, std::move(lhs), std::move(rhs));
}

std::unique_ptr<TreeNode> parse_node(std::istringstream& in) {
  std::string tok;
  if (!(in >> tok)) throw std::invalid_argument("parse_tree: truncated tree");
  if (tok == "L") {
    int action = 0;
    if (!(in >> action)) throw std::invalid_argument("parse_tree: bad leaf action");
    return TreeNode::make_leaf(action);
  }
  if (tok != "C") throw std::invalid_argument("parse_tree: unknown tree tag '" + tok + "'");
  std::string op_tok;
  if (!(in >> op_tok)) throw std::invalid_argument("parse_tree: truncated comparison");
  CmpOp op;
  if (op_tok == "<")
    op = CmpOp::Less;
  else if (op_tok == "==")
    op = CmpOp::Equal;
  else if (op_tok == ">")
    op = CmpOp::Greater;
  else
    throw std::invalid_argument("parse_tree: unknown comparison '" + op_tok + "'");
  auto lhs = parse_expr(in);
  auto rhs = parse_expr(in);
  auto if_true = parse_node(in);
  auto if_false = parse_node(in);
  return TreeNode::make_condition(Comparison::make(op, std::move(lhs), std::move(rhs)), std::move(if_true),
                                  std::move(if_false));
}

}  // namespace

std::string serialize_tree(const TreeNode& t) {
  std::string out;
  serialize_node(t, out);
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::unique_ptr<TreeNode> parse_tree(const std::string& text) {
  std::istringstream in(text);
  auto tree = parse_node(in);
  std::string rest;
  if (in >> rest) throw std::invalid_argument("parse_tree: trailing tokens");
  return tree;
}

}  // namespace evopipe
