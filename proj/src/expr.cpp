#include "dcpsr/expr.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dcpsr {

namespace {

std::shared_ptr<const ExprNode> make_node(ExprNode&& n) {
  return std::make_shared<const ExprNode>(std::move(n));
}

}  // namespace

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("constant must be finite");
  }
  ExprNode n;
  n.kind = ExprKind::Const;
  n.value = value;
  return Expr(make_node(std::move(n)));
}

Expr Expr::variable(int index) {
  if (index < 0) {
    throw std::invalid_argument("variable index must be nonnegative");
  }
  ExprNode n;
  n.kind = ExprKind::Var;
  n.index = index;
  return Expr(make_node(std::move(n)));
}

Expr Expr::unary(UnaryOp op, Expr child) {
  if (!child.valid()) {
    throw std::invalid_argument("unary child must be a valid expression");
  }
  ExprNode n;
  n.kind = ExprKind::Unary;
  n.uop = op;
  n.a = std::move(child);
  return Expr(make_node(std::move(n)));
}

Expr Expr::binary(BinaryOp op, Expr left, Expr right) {
  if (!left.valid() || !right.valid()) {
    throw std::invalid_argument("binary operands must be valid expressions");
  }
  ExprNode n;
  n.kind = ExprKind::Binary;
  n.bop = op;
  n.a = std::move(left);
  n.b = std::move(right);
  return Expr(make_node(std::move(n)));
}

ExprKind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
int Expr::var_index() const { return node_->index; }
UnaryOp Expr::unary_op() const { return node_->uop; }
BinaryOp Expr::binary_op() const { return node_->bop; }
const Expr& Expr::child() const { return node_->a; }
const Expr& Expr::left() const { return node_->a; }
const Expr& Expr::right() const { return node_->b; }

bool node_identical(const Expr& lhs, const Expr& rhs) {
  if (lhs.valid() != rhs.valid()) return false;
  if (!lhs.valid()) return true;
  if (lhs.kind() != rhs.kind()) return false;
  switch (lhs.kind()) {
    case ExprKind::Const:
      return std::bit_cast<std::uint64_t>(lhs.value()) == std::bit_cast<std::uint64_t>(rhs.value());
    case ExprKind::Var:
      return lhs.var_index() == rhs.var_index();
    case ExprKind::Unary:
      return lhs.unary_op() == rhs.unary_op() && node_identical(lhs.child(), rhs.child());
    case ExprKind::Binary:
      return lhs.binary_op() == rhs.binary_op() && node_identical(lhs.left(), rhs.left()) &&
             node_identical(lhs.right(), rhs.right());
  }
  return false;
}

double evaluate(const Expr& expr, const Eigen::Ref<const Eigen::VectorXd>& point) {
  switch (expr.kind()) {
    case ExprKind::Const:
      return expr.value();
    case ExprKind::Var: {
      const int i = expr.var_index();
      if (i >= point.size()) {
        throw std::invalid_argument("evaluation point has too few coordinates");
      }
      return point[i];
    }
    case ExprKind::Unary: {
      const double v = evaluate(expr.child(), point);
      switch (expr.unary_op()) {
        case UnaryOp::Exp:
          return std::exp(v);
        case UnaryOp::Square:
          return v * v;
        case UnaryOp::Abs:
          return std::abs(v);
      }
      break;
    }
    case ExprKind::Binary: {
      const double l = evaluate(expr.left(), point);
      const double r = evaluate(expr.right(), point);
      switch (expr.binary_op()) {
        case BinaryOp::Add:
          return l + r;
        case BinaryOp::Mul:
          return l * r;
        case BinaryOp::Max:
          return std::max(l, r);
      }
      break;
    }
  }
  throw std::logic_error("corrupt expression node");
}

Eigen::VectorXd evaluate_all(const Expr& expr, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  const Eigen::Index rows = points.rows();
  switch (expr.kind()) {
    case ExprKind::Const:
      return Eigen::VectorXd::Constant(rows, expr.value());
    case ExprKind::Var: {
      const int i = expr.var_index();
      if (i >= points.cols()) {
        throw std::invalid_argument("evaluation points have too few columns");
      }
      return points.col(i);
    }
    case ExprKind::Unary: {
      Eigen::VectorXd v = evaluate_all(expr.child(), points);
      switch (expr.unary_op()) {
        case UnaryOp::Exp:
          return v.array().exp();
        case UnaryOp::Square:
          return v.array().square();
        case UnaryOp::Abs:
          return v.array().abs();
      }
      break;
    }
    case ExprKind::Binary: {
      Eigen::VectorXd l = evaluate_all(expr.left(), points);
      Eigen::VectorXd r = evaluate_all(expr.right(), points);
      switch (expr.binary_op()) {
        case BinaryOp::Add:
          return l + r;
        case BinaryOp::Mul:
          return l.cwiseProduct(r);
        case BinaryOp::Max:
          return l.cwiseMax(r);
      }
      break;
    }
  }
  throw std::logic_error("corrupt expression node");
}

int complexity(const Expr& expr) {
  switch (expr.kind()) {
    case ExprKind::Const:
    case ExprKind::Var:
      return 1;
    case ExprKind::Unary:
      return 1 + complexity(expr.child());
    case ExprKind::Binary:
      return 1 + complexity(expr.left()) + complexity(expr.right());
  }
  return 1;
}

int min_var_count(const Expr& expr) {
  switch (expr.kind()) {
    case ExprKind::Const:
      return 0;
    case ExprKind::Var:
      return expr.var_index() + 1;
    case ExprKind::Unary:
      return min_var_count(expr.child());
    case ExprKind::Binary:
      return std::max(min_var_count(expr.left()), min_var_count(expr.right()));
  }
  return 0;
}

namespace {

// Infix precedence levels used for minimal parenthesization. The parser is
// left-associative, so right operands must sit one level above their parent.
constexpr int kLevelAdd = 1;
constexpr int kLevelMul = 2;
constexpr int kLevelAtom = 3;

int print_level(const Expr& e) {
  if (e.kind() == ExprKind::Binary) {
    if (e.binary_op() == BinaryOp::Add) return kLevelAdd;
    if (e.binary_op() == BinaryOp::Mul) return kLevelMul;
  }
  return kLevelAtom;  // leaves, function calls, negative literals
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void format_into(const Expr& e, std::string& out, int min_level) {
  const bool parens = print_level(e) < min_level;
  if (parens) out.push_back('(');
  switch (e.kind()) {
    case ExprKind::Const:
      append_number(out, e.value());
      break;
    case ExprKind::Var:
      out.push_back('x');
      out.append(std::to_string(e.var_index() + 1));
      break;
    case ExprKind::Unary: {
      switch (e.unary_op()) {
        case UnaryOp::Exp:
          out.append("exp(");
          break;
        case UnaryOp::Square:
          out.append("sq(");
          break;
        case UnaryOp::Abs:
          out.append("abs(");
          break;
      }
      format_into(e.child(), out, kLevelAdd);
      out.push_back(')');
      break;
    }
    case ExprKind::Binary: {
      switch (e.binary_op()) {
        case BinaryOp::Add:
          format_into(e.left(), out, kLevelAdd);
          out.append(" + ");
          format_into(e.right(), out, kLevelMul);
          break;
        case BinaryOp::Mul:
          format_into(e.left(), out, kLevelMul);
          out.append(" * ");
          format_into(e.right(), out, kLevelAtom);
          break;
        case BinaryOp::Max:
          out.append("max(");
          format_into(e.left(), out, kLevelAdd);
          out.append(", ");
          format_into(e.right(), out, kLevelAdd);
          out.push_back(')');
          break;
      }
      break;
    }
  }
  if (parens) out.push_back(')');
}

}  // namespace

std::string format(const Expr& expr) {
  std::string out;
  format_into(expr, out, kLevelAdd);
  return out;
}

namespace {

void collect_constants(const Expr& e, std::vector<double>& out) {
  switch (e.kind()) {
    case ExprKind::Const:
      out.push_back(e.value());
      return;
    case ExprKind::Var:
      return;
    case ExprKind::Unary:
      collect_constants(e.child(), out);
      return;
    case ExprKind::Binary:
      collect_constants(e.left(), out);
      collect_constants(e.right(), out);
      return;
  }
}

Expr rebuild_with_constants(const Expr& e, const std::vector<double>& values, std::size_t& next) {
  switch (e.kind()) {
    case ExprKind::Const:
      return Expr::constant(values.at(next++));
    case ExprKind::Var:
      return e;
    case ExprKind::Unary:
      return Expr::unary(e.unary_op(), rebuild_with_constants(e.child(), values, next));
    case ExprKind::Binary: {
      Expr l = rebuild_with_constants(e.left(), values, next);
      Expr r = rebuild_with_constants(e.right(), values, next);
      return Expr::binary(e.binary_op(), std::move(l), std::move(r));
    }
  }
  throw std::logic_error("corrupt expression node");
}

}  // namespace

std::vector<double> constants(const Expr& expr) {
  std::vector<double> out;
  collect_constants(expr, out);
  return out;
}

Expr with_constants(const Expr& expr, const std::vector<double>& values) {
  if (constants(expr).size() != values.size()) {
    throw std::invalid_argument("with_constants: value count does not match constant count");
  }
  std::size_t next = 0;
  return rebuild_with_constants(expr, values, next);
}

namespace {

const Expr* find_subtree(const Expr& e, int& remaining) {
  if (remaining == 0) return &e;
  --remaining;
  switch (e.kind()) {
    case ExprKind::Const:
    case ExprKind::Var:
      return nullptr;
    case ExprKind::Unary:
      return find_subtree(e.child(), remaining);
    case ExprKind::Binary:
      if (const Expr* hit = find_subtree(e.left(), remaining)) return hit;
      return find_subtree(e.right(), remaining);
  }
  return nullptr;
}

Expr rebuild_replaced(const Expr& e, const Expr& replacement, int& remaining) {
  if (remaining == 0) {
    --remaining;
    return replacement;
  }
  --remaining;
  switch (e.kind()) {
    case ExprKind::Const:
    case ExprKind::Var:
      return e;
    case ExprKind::Unary:
      return Expr::unary(e.unary_op(), rebuild_replaced(e.child(), replacement, remaining));
    case ExprKind::Binary: {
      Expr l = rebuild_replaced(e.left(), replacement, remaining);
      Expr r = remaining < 0 ? e.right() : rebuild_replaced(e.right(), replacement, remaining);
      return Expr::binary(e.binary_op(), std::move(l), std::move(r));
    }
  }
  throw std::logic_error("corrupt expression node");
}

}  // namespace

Expr subtree(const Expr& expr, int preorder_index) {
  if (preorder_index < 0 || preorder_index >= complexity(expr)) {
    throw std::invalid_argument("subtree index out of range");
  }
  int remaining = preorder_index;
  const Expr* hit = find_subtree(expr, remaining);
  if (hit == nullptr) throw std::logic_error("subtree lookup failed");
  return *hit;
}

Expr replace_subtree(const Expr& expr, int preorder_index, const Expr& replacement) {
  if (preorder_index < 0 || preorder_index >= complexity(expr)) {
    throw std::invalid_argument("replace_subtree index out of range");
  }
  if (!replacement.valid()) {
    throw std::invalid_argument("replacement must be a valid expression");
  }
  int remaining = preorder_index;
  return rebuild_replaced(expr, replacement, remaining);
}

}  // namespace dcpsr
