#include "dcpsr/quadfit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace dcpsr {

namespace {

constexpr double kRidge = 1e-10;  // conditioning only; below every test tolerance
constexpr double kMseTol = 1e-12;
constexpr int kMaxPasses = 100;

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& features, const Eigen::VectorXd& y) {
  Eigen::MatrixXd gram = features.transpose() * features;
  gram.diagonal().array() += kRidge;
  return gram.ldlt().solve(features.transpose() * y);
}

Eigen::VectorXd quad_part(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A) {
  return (X * A).cwiseProduct(X).rowwise().sum();
}

}  // namespace

int param_count(int n) {
  if (n < 1) throw std::invalid_argument("param_count: n must be >= 1");
  return n * (n + 1) / 2 + n + 1;
}

double predict(const QuadModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.b.size()) {
    throw std::invalid_argument("predict: point dimension does not match model");
  }
  return x.dot(model.A * x) + model.b.dot(x) + model.c;
}

double mse(const QuadModel& model, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("mse: empty dataset");
  if (data.n_vars != model.n_vars()) {
    throw std::invalid_argument("mse: dataset width does not match model");
  }
  const Eigen::VectorXd pred = quad_part(data.X, model.A) + data.X * model.b +
                               Eigen::VectorXd::Constant(data.size(), model.c);
  return (pred - data.y).squaredNorm() / static_cast<double>(data.size());
}

QuadFitReport fit_quadratic(const Dataset& data) {
  const int n = data.n_vars;
  const Eigen::Index rows = data.size();
  if (n < 1 || rows == 0) throw std::invalid_argument("fit_quadratic: empty dataset");
  if (!data.X.allFinite() || !data.y.allFinite()) {
    throw std::invalid_argument("fit_quadratic: non-finite data");
  }
  const int p = param_count(n);
  if (rows < p) {
    throw std::invalid_argument("fit_quadratic: underdetermined, need at least " +
                                std::to_string(p) + " samples for n=" + std::to_string(n));
  }

  // Monomial features: upper-triangular x_i x_j (counted once), then the
  // linear terms, then the constant.
  Eigen::MatrixXd features(rows, p);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      features.col(col++) = data.X.col(i).cwiseProduct(data.X.col(j));
    }
  }
  for (int i = 0; i < n; ++i) features.col(col++) = data.X.col(i);
  features.col(col) = Eigen::VectorXd::Ones(rows);

  const Eigen::VectorXd theta = ridge_solve(features, data.y);

  QuadFitReport report;
  QuadModel& m = report.model;
  m.A.setZero(n, n);
  col = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == j) {
        m.A(i, i) = theta[col];
      } else {
        // the off-diagonal feature was counted once; x'Ax counts it twice
        m.A(i, j) = m.A(j, i) = 0.5 * theta[col];
      }
      ++col;
    }
  }
  m.b = theta.segment(col, n);
  m.c = theta[p - 1];

  Eigen::MatrixXd linear_features(rows, n + 1);
  linear_features.leftCols(n) = data.X;
  linear_features.col(n) = Eigen::VectorXd::Ones(rows);

  double prev_mse = std::numeric_limits<double>::infinity();
  for (int pass = 1; pass <= kMaxPasses; ++pass) {
    report.iterations = pass;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.A);
    if (eig.info() != Eigen::Success) {
      throw std::runtime_error("fit_quadratic: eigendecomposition failed");
    }
    if (eig.eigenvalues().minCoeff() < 0.0) {
      report.projection_applied = true;
      const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
      m.A = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
      m.A = 0.5 * (m.A + m.A.transpose());  // keep A = A' exactly
    }

    const Eigen::VectorXd q = quad_part(data.X, m.A);
    const Eigen::VectorXd bc = ridge_solve(linear_features, data.y - q);
    m.b = bc.head(n);
    m.c = bc[n];

    const double cur_mse =
        (q + linear_features * bc - data.y).squaredNorm() / static_cast<double>(rows);
    report.mse_history.push_back(cur_mse);
    if (prev_mse - cur_mse < kMseTol) break;
    prev_mse = cur_mse;
  }
  report.train_mse = report.mse_history.back();
  return report;
}

}  // namespace dcpsr
