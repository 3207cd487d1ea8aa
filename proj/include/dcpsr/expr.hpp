#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dcpsr {

/// Unary atoms. The set is closed: nothing outside it parses or evaluates.
enum class UnaryOp { Exp, Square, Abs };

/// Binary atoms. Negation and subtraction are spelled with Mul(Const(-1), e).
enum class BinaryOp { Add, Mul, Max };

enum class ExprKind { Const, Var, Unary, Binary };

struct ExprNode;

/// Immutable expression tree over the atom set. Expr is a cheap value handle
/// (shared, structurally immutable), so subtrees can be shared freely across
/// trees and threads.
class Expr {
 public:
  Expr() = default;  // empty handle; only factory-built trees are valid

  static Expr constant(double value);
  static Expr variable(int index);
  static Expr unary(UnaryOp op, Expr child);
  static Expr binary(BinaryOp op, Expr left, Expr right);

  bool valid() const { return node_ != nullptr; }

  ExprKind kind() const;
  double value() const;      // Const only
  int var_index() const;     // Var only
  UnaryOp unary_op() const;  // Unary only
  BinaryOp binary_op() const;
  const Expr& child() const;  // Unary only
  const Expr& left() const;   // Binary only
  const Expr& right() const;

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  ExprKind kind = ExprKind::Const;
  double value = 0.0;
  int index = 0;
  UnaryOp uop = UnaryOp::Exp;
  BinaryOp bop = BinaryOp::Add;
  Expr a;
  Expr b;
};

/// Structural equality, comparing constants by bit pattern.
bool node_identical(const Expr& lhs, const Expr& rhs);
inline bool operator==(const Expr& lhs, const Expr& rhs) { return node_identical(lhs, rhs); }
inline bool operator!=(const Expr& lhs, const Expr& rhs) { return !node_identical(lhs, rhs); }

/// Value of the expression at a point. Overflow (e.g. exp of a large
/// argument) propagates as +/-infinity rather than erroring, so a fitness
/// function can penalize explosive candidates. Throws std::invalid_argument
/// when the point has fewer entries than the largest variable index needs.
double evaluate(const Expr& expr, const Eigen::Ref<const Eigen::VectorXd>& point);

/// Column of values for every row of X at once (one Eigen pass per node).
Eigen::VectorXd evaluate_all(const Expr& expr, const Eigen::Ref<const Eigen::MatrixXd>& points);

/// Total node count; every Const, Var, Unary and Binary node counts as 1.
int complexity(const Expr& expr);

/// 1 + the largest variable index referenced, or 0 for variable-free trees.
int min_var_count(const Expr& expr);

/// Canonical text form. parse(format(e), n) reproduces e node-for-node;
/// constants are printed with shortest round-trip digits.
std::string format(const Expr& expr);

/// Constant leaves in depth-first, left-to-right order.
std::vector<double> constants(const Expr& expr);

/// Structurally identical tree with Const leaves replaced in traversal
/// order. Throws std::invalid_argument when the lengths do not match.
Expr with_constants(const Expr& expr, const std::vector<double>& values);

/// Subtree rooted at the node with the given depth-first preorder index.
Expr subtree(const Expr& expr, int preorder_index);

/// Copy of expr with the node at the given preorder index replaced.
Expr replace_subtree(const Expr& expr, int preorder_index, const Expr& replacement);

}  // namespace dcpsr
