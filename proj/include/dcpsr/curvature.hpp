#pragma once

#include <string>
#include <vector>

#include "dcpsr/expr.hpp"

namespace dcpsr {

/// Curvature classes, ordered Constant ⊂ Affine ⊂ Convex (resp. Concave).
/// Unknown absorbs everything the rules cannot certify.
enum class Curvature { Constant, Affine, Convex, Concave, Unknown };

/// Sign classes, with Zero ⊂ Nonnegative and Zero ⊂ Nonpositive. Sign is the
/// monotonicity witness that lets sq/abs accept non-affine arguments.
enum class Sign { Zero, Nonnegative, Nonpositive, Unknown };

const char* to_string(Curvature c);
const char* to_string(Sign s);

struct NodeAnnotation {
  Curvature curvature = Curvature::Unknown;
  Sign sign = Sign::Unknown;
  const char* rule = "";  // which composition rule fired
};

/// Convexity certificate: per-node annotations in depth-first post-order
/// (children before parents, left before right) plus the root verdict.
struct CurvatureReport {
  Curvature root_curvature = Curvature::Unknown;
  Sign root_sign = Sign::Unknown;
  bool verdict = false;  // true iff root curvature is Constant/Affine/Convex
  std::vector<NodeAnnotation> nodes;

  /// Human-readable reason when verdict is false.
  std::string rejection_reason() const;
};

/// Bottom-up curvature/sign propagation. Never fails: an expression the
/// rules cannot certify gets curvature Unknown and verdict false.
CurvatureReport analyze(const Expr& expr);

/// Shorthand for analyze(expr).verdict.
bool is_dcp_convex(const Expr& expr);

/// One line per node in depth-first post-order
/// ("<subexpression>: <Curvature>/<Sign>, <rule>") followed by a verdict
/// line. The format is stable and covered by golden tests.
std::string explain(const Expr& expr);

}  // namespace dcpsr
