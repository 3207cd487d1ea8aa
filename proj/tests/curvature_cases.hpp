#pragma once

// Golden curvature/sign table with hand-derived labels, shared by the unit
// and acceptance suites. Includes the documented conservatism case
// x1 * x1 (mathematically convex, rejected by the rules).

#include <vector>

#include "dcpsr/curvature.hpp"

namespace testutil {

struct CurvatureCase {
  const char* text;
  int n_vars;
  dcpsr::Curvature curvature;
  dcpsr::Sign sign;
};

inline const std::vector<CurvatureCase>& curvature_cases() {
  using dcpsr::Curvature;
  using dcpsr::Sign;
  static const std::vector<CurvatureCase> kCases = {
      // worked examples
      {"max(x1, -5*x1)", 1, Curvature::Convex, Sign::Unknown},
      {"exp(x1 + max(x1, -5*x1) + sq(x1)) + 4*x1", 1, Curvature::Convex, Sign::Unknown},
      {"-1 * sq(x1)", 1, Curvature::Concave, Sign::Nonpositive},
      {"exp(-1 * sq(x1))", 1, Curvature::Unknown, Sign::Nonnegative},
      {"sq(exp(x1))", 1, Curvature::Convex, Sign::Nonnegative},
      // leaves and affine forms
      {"42", 1, Curvature::Constant, Sign::Nonnegative},
      {"-3", 1, Curvature::Constant, Sign::Nonpositive},
      {"0", 1, Curvature::Constant, Sign::Zero},
      {"x1", 1, Curvature::Affine, Sign::Unknown},
      {"3*x1 + 2", 1, Curvature::Affine, Sign::Unknown},
      {"x1 + -1*x1", 1, Curvature::Affine, Sign::Unknown},
      {"2 * (3 * x1)", 1, Curvature::Affine, Sign::Unknown},
      // atoms on affine arguments
      {"sq(x1)", 1, Curvature::Convex, Sign::Nonnegative},
      {"abs(x1)", 1, Curvature::Convex, Sign::Nonnegative},
      {"exp(x1)", 1, Curvature::Convex, Sign::Nonnegative},
      {"exp(2)", 1, Curvature::Constant, Sign::Nonnegative},
      {"exp(-1 * x1)", 1, Curvature::Convex, Sign::Nonnegative},
      // scaling
      {"-2 * exp(x1)", 1, Curvature::Concave, Sign::Nonpositive},
      {"0 * sq(x1)", 1, Curvature::Constant, Sign::Zero},
      {"(1 + -2) * sq(x1)", 1, Curvature::Unknown, Sign::Unknown},
      // sums
      {"sq(x1) + sq(x2)", 2, Curvature::Convex, Sign::Nonnegative},
      {"abs(x1) + sq(x1)", 1, Curvature::Convex, Sign::Nonnegative},
      {"sq(x1) + -1 * sq(x1)", 1, Curvature::Unknown, Sign::Unknown},
      {"exp(exp(x1)) + exp(x1)", 1, Curvature::Convex, Sign::Nonnegative},
      {"max(x1, -5*x1) + 4*x1", 1, Curvature::Convex, Sign::Unknown},
      // max
      {"max(x1, x2)", 2, Curvature::Convex, Sign::Unknown},
      {"max(sq(x1), 1)", 1, Curvature::Convex, Sign::Nonnegative},
      {"max(-1 * sq(x1), x1)", 1, Curvature::Unknown, Sign::Unknown},
      // sign-mediated compositions
      {"exp(sq(x1))", 1, Curvature::Convex, Sign::Nonnegative},
      {"exp(max(x1, 0))", 1, Curvature::Convex, Sign::Nonnegative},
      {"sq(sq(x1))", 1, Curvature::Convex, Sign::Nonnegative},
      {"sq(-1 * abs(x1))", 1, Curvature::Convex, Sign::Nonnegative},
      {"abs(-1 * exp(x1))", 1, Curvature::Convex, Sign::Nonnegative},
      {"sq(x1 + max(x1, -5*x1))", 1, Curvature::Unknown, Sign::Nonnegative},
      // conservatism: products of non-constants are never certified
      {"x1 * x1", 1, Curvature::Unknown, Sign::Unknown},
      {"sq(x1) * sq(x1)", 1, Curvature::Unknown, Sign::Nonnegative},
  };
  return kCases;
}

}  // namespace testutil
