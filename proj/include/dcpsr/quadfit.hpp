#pragma once

#include <vector>

#include <Eigen/Core>

#include "dcpsr/datagen.hpp"

namespace dcpsr {

/// f(x) = x' A x + b' x + c with A stored exactly symmetric and PSD up to
/// tolerance (min eigenvalue >= -1e-8).
struct QuadModel {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double c = 0.0;

  int n_vars() const { return static_cast<int>(b.size()); }
};

struct QuadFitReport {
  QuadModel model;
  double train_mse = 0.0;
  int iterations = 0;
  bool projection_applied = false;
  std::vector<double> mse_history;  // MSE after each projection/refit pass
};

double predict(const QuadModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Projected least squares: unconstrained fit in the quadratic monomial
/// features, then alternate eigenvalue clipping of A with re-solving (b, c)
/// until the MSE improvement drops below 1e-12 (at most 100 passes).
/// Throws when the sample count is below param_count(n) or data is
/// non-finite.
QuadFitReport fit_quadratic(const Dataset& data);

/// Unique parameters of a PSD quadratic in n variables:
/// n(n+1)/2 + n + 1.
int param_count(int n);

double mse(const QuadModel& model, const Dataset& data);

}  // namespace dcpsr
