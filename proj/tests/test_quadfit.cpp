#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "dcpsr/parse.hpp"
#include "dcpsr/quadfit.hpp"
#include "dcpsr/rng.hpp"
#include "test_util.hpp"

using namespace dcpsr;

namespace {

Dataset make_1d(int count, std::uint64_t seed, const std::function<double(double)>& f) {
  std::mt19937_64 rng(seed);
  Dataset d;
  d.n_vars = 1;
  d.X.resize(count, 1);
  d.y.resize(count);
  for (int i = 0; i < count; ++i) {
    const double x = uniform_real(rng, -1.0, 1.0);
    d.X(i, 0) = x;
    d.y[i] = f(x);
  }
  return d;
}

Dataset make_2d(int count, std::uint64_t seed,
                const std::function<double(double, double)>& f) {
  std::mt19937_64 rng(seed);
  Dataset d;
  d.n_vars = 2;
  d.X.resize(count, 2);
  d.y.resize(count);
  for (int i = 0; i < count; ++i) {
    const double a = uniform_real(rng, -1.0, 1.0);
    const double b = uniform_real(rng, -1.0, 1.0);
    d.X(i, 0) = a;
    d.X(i, 1) = b;
    d.y[i] = f(a, b);
  }
  return d;
}

// test-side oracle: plain normal-equations solve in the quadratic monomial
// basis, no ridge, no projection
Eigen::VectorXd lls_oracle_1d(const Dataset& d) {
  Eigen::MatrixXd phi(d.size(), 3);
  phi.col(0) = d.X.col(0).cwiseProduct(d.X.col(0));
  phi.col(1) = d.X.col(0);
  phi.col(2) = Eigen::VectorXd::Ones(d.size());
  return (phi.transpose() * phi).fullPivLu().solve(phi.transpose() * d.y);
}

}  // namespace

TEST_CASE("param_count: closed form") {
  CHECK(param_count(1) == 3);
  CHECK(param_count(2) == 6);
  CHECK(param_count(10) == 66);
  CHECK_THROWS_AS(param_count(0), std::invalid_argument);
}

TEST_CASE("predict: direct evaluations") {
  QuadModel m;
  m.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  m.b = Eigen::VectorXd::Zero(1);
  m.c = 0.0;
  CHECK(predict(m, Eigen::VectorXd::Constant(1, 2.0)) == 4.0);

  m.A.setZero();
  m.b[0] = 3.0;
  m.c = 1.0;
  CHECK(predict(m, Eigen::VectorXd::Constant(1, 2.0)) == 7.0);

  // reported 1-D fit: 61.6 x^2 - 20.4 x - 4.9 evaluates to -4.9 at 0
  m.A(0, 0) = 61.6;
  m.b[0] = -20.4;
  m.c = -4.9;
  CHECK(predict(m, Eigen::VectorXd::Zero(1)) == -4.9);

  CHECK_THROWS_AS(predict(m, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("fit: recovers y = x^2 against the normal-equations oracle") {
  Dataset d = make_1d(50, 42, [](double x) { return x * x; });
  const QuadFitReport rep = fit_quadratic(d);
  CHECK(std::abs(rep.model.A(0, 0) - 1.0) <= 1e-6);
  CHECK(std::abs(rep.model.b[0]) <= 1e-6);
  CHECK(std::abs(rep.model.c) <= 1e-6);
  CHECK_FALSE(rep.projection_applied);
  CHECK(rep.train_mse <= 1e-12);

  const Eigen::VectorXd oracle = lls_oracle_1d(d);
  CHECK(rep.model.A(0, 0) == doctest::Approx(oracle[0]).epsilon(1e-8));
  CHECK(rep.model.b[0] == doctest::Approx(oracle[1]).epsilon(1e-8));
  CHECK(rep.model.c == doctest::Approx(oracle[2]).epsilon(1e-8));
}

TEST_CASE("fit: clips y = -x^2 to A = 0") {
  // eigendecomposition of a 1x1 matrix is the entry itself: the
  // unconstrained optimum is -1, clipped to 0
  Dataset d = make_1d(50, 43, [](double x) { return -x * x; });
  const QuadFitReport rep = fit_quadratic(d);
  CHECK(rep.projection_applied);
  CHECK(rep.model.A(0, 0) == 0.0);
}

TEST_CASE("fit: constant data") {
  Dataset d = make_1d(40, 44, [](double) { return 5.0; });
  const QuadFitReport rep = fit_quadratic(d);
  CHECK(std::abs(rep.model.A(0, 0)) <= 1e-6);
  CHECK(std::abs(rep.model.b[0]) <= 1e-6);
  CHECK(rep.model.c == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("fit: underdetermined and non-finite data are rejected") {
  Dataset d = make_1d(2, 45, [](double x) { return x; });
  CHECK_THROWS_AS(fit_quadratic(d), std::invalid_argument);
  Dataset bad = make_1d(10, 46, [](double x) { return x; });
  bad.y[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_quadratic(bad), std::invalid_argument);
}

TEST_CASE("fit: 2-D PSD certificate via an independent eigensolver") {
  // indefinite ground truth x^2 - y^2 forces a projection
  Dataset d = make_2d(120, 47, [](double a, double b) { return a * a - b * b; });
  const QuadFitReport rep = fit_quadratic(d);
  CHECK(rep.projection_applied);
  CHECK((rep.model.A - rep.model.A.transpose()).norm() == 0.0);
  CHECK(testutil::jacobi_min_eigenvalue(rep.model.A) >= -1e-8);

  // PSD ground truth fits without projection
  Dataset ok = make_2d(120, 48, [](double a, double b) { return a * a + 2 * b * b + a * b; });
  const QuadFitReport rep2 = fit_quadratic(ok);
  CHECK(testutil::jacobi_min_eigenvalue(rep2.model.A) >= -1e-8);
  CHECK(rep2.train_mse <= 1e-10);
}

TEST_CASE("fit: MSE history is non-increasing across passes") {
  Dataset d = make_2d(100, 49, [](double a, double b) { return -a * a + b + 0.5 * a * b; });
  const QuadFitReport rep = fit_quadratic(d);
  REQUIRE_FALSE(rep.mse_history.empty());
  for (std::size_t i = 1; i < rep.mse_history.size(); ++i) {
    CHECK(rep.mse_history[i] <= rep.mse_history[i - 1] + 1e-15);
  }
  CHECK(rep.train_mse == rep.mse_history.back());
  CHECK(rep.iterations == static_cast<int>(rep.mse_history.size()));
}

TEST_CASE("fitted models satisfy the numerical convexity oracle") {
  Dataset d = make_1d(60, 50, [](double x) { return std::exp(2 * x); });
  const QuadFitReport rep = fit_quadratic(d);
  std::mt19937_64 rng(51);
  const auto check = testutil::midpoint_convexity(
      [&](const Eigen::VectorXd& x) { return predict(rep.model, x); }, 1, -2.0, 2.0, 3000, rng);
  CHECK(check.violations == 0);

  Dataset d2 = make_2d(150, 52, [](double a, double b) { return -a * a - b * b + a; });
  const QuadFitReport rep2 = fit_quadratic(d2);
  std::mt19937_64 rng2(53);
  const auto check2 = testutil::midpoint_convexity(
      [&](const Eigen::VectorXd& x) { return predict(rep2.model, x); }, 2, -2.0, 2.0, 3000, rng2);
  CHECK(check2.violations == 0);
}

TEST_CASE("mse: direct cases") {
  QuadModel exact;
  exact.A = Eigen::MatrixXd::Constant(1, 1, 2.0);
  exact.b = Eigen::VectorXd::Constant(1, -1.0);
  exact.c = 0.25;
  Dataset d = make_1d(30, 54, [&](double x) { return 2 * x * x - x + 0.25; });
  CHECK(mse(exact, d) <= 1e-28);

  QuadModel zero;
  zero.A = Eigen::MatrixXd::Zero(1, 1);
  zero.b = Eigen::VectorXd::Zero(1);
  zero.c = 0.0;
  Dataset ones = make_1d(30, 55, [](double) { return 1.0; });
  CHECK(mse(zero, ones) == doctest::Approx(1.0));

  Dataset empty;
  empty.n_vars = 1;
  empty.X.resize(0, 1);
  empty.y.resize(0);
  CHECK_THROWS_AS(mse(zero, empty), std::invalid_argument);
}
