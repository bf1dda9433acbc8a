#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evopipe {

enum class ArithOp { Add, Sub, Mul, Div };  // Div is protected
enum class CmpOp { Less, Equal, Greater };

// Expression over the coordinate vector: constant, variable, or arithmetic
// node. Depth of a constant/variable is 0.
struct Expr {
  enum class Kind { Constant, Variable, Arith };

  Kind kind = Kind::Constant;
  double value = 0.0;                 // Constant
  int index = 0;                      // Variable
  ArithOp op = ArithOp::Add;          // Arith
  std::unique_ptr<Expr> lhs, rhs;     // Arith

  static std::unique_ptr<Expr> constant(double v);
  static std::unique_ptr<Expr> variable(int index);
  static std::unique_ptr<Expr> arith(ArithOp op, std::unique_ptr<Expr> lhs, std::unique_ptr<Expr> rhs);
  std::unique_ptr<Expr> clone() const;
};

struct Comparison {
  CmpOp op = CmpOp::Less;
  std::unique_ptr<Expr> lhs, rhs;

  static std::unique_ptr<Comparison> make(CmpOp op, std::unique_ptr<Expr> lhs, std::unique_ptr<Expr> rhs);
  std::unique_ptr<Comparison> clone() const;
};

// Decision tree node: a leaf holding an action index, or a condition with a
// comparison test and two branches.
struct TreeNode {
  bool leaf = true;
  int action = 0;
  std::unique_ptr<Comparison> test;
  std::unique_ptr<TreeNode> if_true, if_false;

  static std::unique_ptr<TreeNode> make_leaf(int action);
  static std::unique_ptr<TreeNode> make_condition(std::unique_ptr<Comparison> test, std::unique_ptr<TreeNode> t,
                                                  std::unique_ptr<TreeNode> f);
  std::unique_ptr<TreeNode> clone() const;
};

inline constexpr double kProtectedDivEpsilon = 1e-9;  // |denominator| below this yields 1

double evaluate_expr(const Expr& e, std::span<const double> inputs);
bool evaluate_comparison(const Comparison& c, std::span<const double> inputs);

// Descends conditions to a leaf and returns its action index.
int evaluate(const TreeNode& tree, std::span<const double> inputs);

int expr_depth(const Expr& e);
int tree_depth(const TreeNode& t);  // condition nesting; a lone leaf is 0

bool equal(const Expr& a, const Expr& b);
bool equal(const TreeNode& a, const TreeNode& b);

// Throws std::invalid_argument naming the violated constraint.
void validate(const TreeNode& t, int max_tree_depth, int max_condition_depth, int variable_arity,
              int action_count);

// Counting convention: symbols = all AST nodes; operations = arithmetic
// operators + comparisons + conditions; the non-arithmetic operations are
// the comparisons and conditions; consecutive non-arithmetic compositions =
// maximum number of conditions on a root-to-leaf path.
struct ComplexityProfile {
  int symbols = 0;                // l
  int operations = 0;             // n_o
  int non_arith_operations = 0;   // n_nao
  int max_condition_nesting = 0;  // n_naoc
};

ComplexityProfile complexity_profile(const TreeNode& t);

// Complexity metric, 0 for a constant model, growing with size.
double m_prime(const ComplexityProfile& p);
// Interpretability score; m_score(p) + m_prime(p) == 78.9 for every p.
double m_score(const ComplexityProfile& p);

// Inclusive integer range of one input variable.
struct VariableDomain {
  int lo = 0;
  int hi = 0;
};

// Replaces conditions whose comparison has a single truth value over the
// domain: constant across an exhaustive coarse integer lattice and, when
// both sides are affine, confirmed by interval arithmetic. Reporting tool;
// never used inside fitness evaluation.
std::unique_ptr<TreeNode> simplify(const TreeNode& t, std::span<const VariableDomain> domain);

enum class TruthValue { AlwaysTrue, AlwaysFalse, Varies };
TruthValue comparison_truth(const Comparison& c, std::span<const VariableDomain> domain);

std::string render_expr(const Expr& e, std::span<const std::string> variable_names);
std::string render_comparison(const Comparison& c, std::span<const std::string> variable_names);

// Human-readable text: "if y_p < y_o then PUNCH else UP" when both branches
// are leaves, indented blocks otherwise.
std::string render_text(const TreeNode& t, std::span<const std::string> variable_names,
                        std::span<const std::string> action_names);

std::string render_dot(const TreeNode& t, std::span<const std::string> variable_names,
                       std::span<const std::string> action_names);

// Pre-order serialization with explicit node tags; round-trips exactly.
std::string serialize_tree(const TreeNode& t);
std::unique_ptr<TreeNode> parse_tree(const std::string& text);

}  // namespace evopipe
