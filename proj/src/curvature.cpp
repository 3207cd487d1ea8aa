#include "dcpsr/curvature.hpp"

#include <stdexcept>
#include <string_view>

namespace dcpsr {

const char* to_string(Curvature c) {
  switch (c) {
    case Curvature::Constant:
      return "Constant";
    case Curvature::Affine:
      return "Affine";
    case Curvature::Convex:
      return "Convex";
    case Curvature::Concave:
      return "Concave";
    case Curvature::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

const char* to_string(Sign s) {
  switch (s) {
    case Sign::Zero:
      return "Zero";
    case Sign::Nonnegative:
      return "Nonnegative";
    case Sign::Nonpositive:
      return "Nonpositive";
    case Sign::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

namespace {

bool in_convex_cone(Curvature c) {
  return c == Curvature::Constant || c == Curvature::Affine || c == Curvature::Convex;
}

bool is_affine(Curvature c) { return c == Curvature::Constant || c == Curvature::Affine; }

// Zero is a member of both one-sided classes.
bool sign_nonnegative(Sign s) { return s == Sign::Zero || s == Sign::Nonnegative; }
bool sign_nonpositive(Sign s) { return s == Sign::Zero || s == Sign::Nonpositive; }

Sign sign_add(Sign a, Sign b) {
  if (a == Sign::Zero) return b;
  if (b == Sign::Zero) return a;
  if (sign_nonnegative(a) && sign_nonnegative(b)) return Sign::Nonnegative;
  if (sign_nonpositive(a) && sign_nonpositive(b)) return Sign::Nonpositive;
  return Sign::Unknown;
}

Sign sign_mul(Sign a, Sign b) {
  if (a == Sign::Zero || b == Sign::Zero) return Sign::Zero;
  if (a == Sign::Unknown || b == Sign::Unknown) return Sign::Unknown;
  return a == b ? Sign::Nonnegative : Sign::Nonpositive;
}

// max over the interval abstraction: lower bounds and upper bounds combine
// with max independently, so e.g. max(Zero, Nonpositive) is Zero and
// max(Zero, Unknown) rises to Nonnegative.
Sign sign_max(Sign a, Sign b) {
  const bool lower_zero = sign_nonnegative(a) || sign_nonnegative(b);
  const bool upper_zero = sign_nonpositive(a) && sign_nonpositive(b);
  if (lower_zero && upper_zero) return Sign::Zero;
  if (lower_zero) return Sign::Nonnegative;
  if (upper_zero) return Sign::Nonpositive;
  return Sign::Unknown;
}

Curvature curvature_add(Curvature a, Curvature b) {
  if (a == Curvature::Unknown || b == Curvature::Unknown) return Curvature::Unknown;
  if (a == Curvature::Constant) return b;
  if (b == Curvature::Constant) return a;
  if (a == Curvature::Affine) return b;
  if (b == Curvature::Affine) return a;
  if (a == b) return a;  // Convex+Convex or Concave+Concave
  return Curvature::Unknown;
}

Curvature flip(Curvature c) {
  if (c == Curvature::Convex) return Curvature::Concave;
  if (c == Curvature::Concave) return Curvature::Convex;
  return c;
}

struct RuleResult {
  Curvature curvature;
  Sign sign;
  const char* rule;
};

// Post-order walk appending one annotation per node.
RuleResult annotate(const Expr& e, std::vector<NodeAnnotation>& out) {
  RuleResult res{Curvature::Unknown, Sign::Unknown, ""};
  switch (e.kind()) {
    case ExprKind::Const: {
      const double v = e.value();
      res.curvature = Curvature::Constant;
      res.sign = v == 0.0 ? Sign::Zero : (v > 0.0 ? Sign::Nonnegative : Sign::Nonpositive);
      res.rule = "leaf";
      break;
    }
    case ExprKind::Var:
      res = {Curvature::Affine, Sign::Unknown, "leaf"};
      break;
    case ExprKind::Unary: {
      const RuleResult arg = annotate(e.child(), out);
      switch (e.unary_op()) {
        case UnaryOp::Exp:
          res.sign = Sign::Nonnegative;
          if (arg.curvature == Curvature::Constant) {
            res.curvature = Curvature::Constant;
            res.rule = "exp-of-constant";
          } else if (in_convex_cone(arg.curvature)) {
            res.curvature = Curvature::Convex;
            res.rule = "exp-of-convex";
          } else if (arg.curvature == Curvature::Concave) {
            res.rule = "exp-of-concave";
          } else {
            res.rule = "exp-of-unknown";
          }
          break;
        case UnaryOp::Square:
        case UnaryOp::Abs: {
          const bool square = e.unary_op() == UnaryOp::Square;
          res.sign = Sign::Nonnegative;
          if (is_affine(arg.curvature)) {
            res.curvature = Curvature::Convex;
            res.rule = square ? "square-of-affine" : "abs-of-affine";
          } else if (arg.curvature == Curvature::Convex && sign_nonnegative(arg.sign)) {
            res.curvature = Curvature::Convex;
            res.rule = square ? "square-of-nonneg-convex" : "abs-of-nonneg-convex";
          } else if (arg.curvature == Curvature::Concave && sign_nonpositive(arg.sign)) {
            res.curvature = Curvature::Convex;
            res.rule = square ? "square-of-nonpos-concave" : "abs-of-nonpos-concave";
          } else {
            res.rule = square ? "square-not-dcp" : "abs-not-dcp";
          }
          break;
        }
      }
      break;
    }
    case ExprKind::Binary: {
      const RuleResult lhs = annotate(e.left(), out);
      const RuleResult rhs = annotate(e.right(), out);
      switch (e.binary_op()) {
        case BinaryOp::Add:
          res.curvature = curvature_add(lhs.curvature, rhs.curvature);
          res.sign = sign_add(lhs.sign, rhs.sign);
          res.rule = res.curvature == Curvature::Unknown ? "sum-mixed-curvature" : "sum";
          break;
        case BinaryOp::Max:
          res.sign = sign_max(lhs.sign, rhs.sign);
          if (in_convex_cone(lhs.curvature) && in_convex_cone(rhs.curvature)) {
            res.curvature = Curvature::Convex;
            res.rule = "max-of-convex";
          } else {
            res.rule = "max-not-dcp";
          }
          break;
        case BinaryOp::Mul: {
          res.sign = sign_mul(lhs.sign, rhs.sign);
          if (lhs.curvature == Curvature::Constant && rhs.curvature == Curvature::Constant) {
            res.curvature = Curvature::Constant;
            res.rule = "constant-product";
            break;
          }
          // scaling: exactly one side has Constant curvature
          const RuleResult* scale = nullptr;
          const RuleResult* other = nullptr;
          if (lhs.curvature == Curvature::Constant) {
            scale = &lhs;
            other = &rhs;
          } else if (rhs.curvature == Curvature::Constant) {
            scale = &rhs;
            other = &lhs;
          } else {
            res.rule = "mul-not-dcp";
            break;
          }
          if (scale->sign == Sign::Zero) {
            res.curvature = Curvature::Constant;
            res.sign = Sign::Zero;
            res.rule = "zero-scaling";
          } else if (scale->sign == Sign::Nonnegative) {
            res.curvature = other->curvature;
            res.rule = "nonnegative-scaling";
          } else if (scale->sign == Sign::Nonpositive) {
            res.curvature = flip(other->curvature);
            res.rule = "nonpositive-scaling";
          } else if (is_affine(other->curvature)) {
            // any constant times an affine function stays affine
            res.curvature = other->curvature;
            res.rule = "unknown-sign-scaling-of-affine";
          } else {
            res.rule = "unknown-sign-scaling";
          }
          break;
        }
      }
      break;
    }
  }
  out.push_back({res.curvature, res.sign, res.rule});
  return res;
}

std::string prose_reason(std::string_view rule) {
  if (rule == "exp-of-concave") return "exp of Concave argument";
  if (rule == "exp-of-unknown") return "exp of Unknown argument";
  if (rule == "square-not-dcp") return "square of argument without a usable sign";
  if (rule == "abs-not-dcp") return "abs of argument without a usable sign";
  if (rule == "max-not-dcp") return "max of non-convex argument";
  if (rule == "mul-not-dcp") return "product of non-constant operands";
  if (rule == "unknown-sign-scaling") return "scaling by unknown-sign constant";
  if (rule == "sum-mixed-curvature") return "sum of Convex and Concave terms";
  return std::string(rule);
}

}  // namespace

std::string CurvatureReport::rejection_reason() const {
  if (verdict) return {};
  if (root_curvature == Curvature::Concave) return "root curvature is Concave";
  // scan post-order for the first node whose own rule failed
  for (const NodeAnnotation& n : nodes) {
    if (n.curvature == Curvature::Unknown) return prose_reason(n.rule);
  }
  return "root curvature is Unknown";
}

CurvatureReport analyze(const Expr& expr) {
  if (!expr.valid()) throw std::invalid_argument("analyze: empty expression");
  CurvatureReport report;
  report.nodes.reserve(static_cast<std::size_t>(complexity(expr)));
  const RuleResult root = annotate(expr, report.nodes);
  report.root_curvature = root.curvature;
  report.root_sign = root.sign;
  report.verdict = in_convex_cone(root.curvature);
  return report;
}

bool is_dcp_convex(const Expr& expr) { return analyze(expr).verdict; }

namespace {

void explain_into(const Expr& e, const CurvatureReport& report, std::size_t& next,
                  std::string& out) {
  switch (e.kind()) {
    case ExprKind::Const:
    case ExprKind::Var:
      break;
    case ExprKind::Unary:
      explain_into(e.child(), report, next, out);
      break;
    case ExprKind::Binary:
      explain_into(e.left(), report, next, out);
      explain_into(e.right(), report, next, out);
      break;
  }
  const NodeAnnotation& ann = report.nodes.at(next++);
  out += format(e);
  out += ": ";
  out += to_string(ann.curvature);
  out += '/';
  out += to_string(ann.sign);
  out += ", ";
  out += ann.rule;
  out += '\n';
}

}  // namespace

std::string explain(const Expr& expr) {
  const CurvatureReport report = analyze(expr);
  std::string out;
  std::size_t next = 0;
  explain_into(expr, report, next, out);
  if (report.verdict) {
    out += "verdict: accepted (";
    out += to_string(report.root_curvature);
    out += ")\n";
  } else {
    out += "verdict: rejected (" + report.rejection_reason() + ")\n";
  }
  return out;
}

}  // namespace dcpsr
