#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcpsr/curvature.hpp"
#include "dcpsr/parse.hpp"
#include "dcpsr/search.hpp"
#include "test_util.hpp"

using namespace dcpsr;

namespace {

Dataset dataset_from(const Expr& truth, int count, double lo, double hi, std::uint64_t seed,
                     int n_vars = 1) {
  Polytope box = Polytope::box(Eigen::VectorXd::Constant(n_vars, lo),
                               Eigen::VectorXd::Constant(n_vars, hi));
  return generate(truth, box, count, 0.0, seed);
}

SearchConfig small_config(std::uint64_t seed = 17) {
  SearchConfig cfg;
  cfg.population_size = 80;
  cfg.generations = 30;
  cfg.rng_seed = seed;
  return cfg;
}

bool front_equal(const ParetoFront& a, const ParetoFront& b) {
  if (a.entries().size() != b.entries().size()) return false;
  auto ia = a.entries().begin();
  for (auto ib = b.entries().begin(); ib != b.entries().end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (!node_identical(ia->second.expr, ib->second.expr)) return false;
    if (ia->second.train_loss != ib->second.train_loss) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("config validation") {
  SearchConfig cfg;
  cfg.population_size = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SearchConfig{};
  cfg.tournament_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SearchConfig{};
  cfg.mutation_weights = {0, 0, 0, 0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SearchConfig{};
  cfg.max_complexity = 2;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(SearchConfig{}.validate());
}

TEST_CASE("random_expr: budget 1 forces a leaf, output always accepted") {
  SearchConfig cfg;
  cfg.n_vars = 2;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    Expr e = random_expr(cfg, rng, 1);
    CHECK(complexity(e) == 1);
  }
  for (int i = 0; i < 200; ++i) {
    Expr e = random_expr(cfg, rng, uniform_int(rng, 1, 6));
    CHECK(is_dcp_convex(e));
    CHECK(complexity(e) <= cfg.max_complexity);
  }
}

TEST_CASE("random_expr is deterministic for a fixed seed") {
  SearchConfig cfg;
  std::mt19937_64 a(123), b(123);
  for (int i = 0; i < 20; ++i) {
    CHECK(node_identical(random_expr(cfg, a, 5), random_expr(cfg, b, 5)));
  }
}

TEST_CASE("mutate: output valid, bounded, and falls back to input") {
  SearchConfig cfg;
  std::mt19937_64 rng(7);
  Expr start = parse("abs(x1) + sq(x1)", 1);
  for (int i = 0; i < 300; ++i) {
    Expr next = mutate(start, cfg, rng);
    CHECK(is_dcp_convex(next));
    CHECK(complexity(next) <= cfg.max_complexity);
    start = next;
  }

  // jitter is the only enabled operator but the tree has no constants:
  // every attempt fails, so the input must come back unchanged
  SearchConfig jitter_only;
  jitter_only.mutation_weights = {0, 0, 1, 0};
  Expr no_consts = parse("abs(x1)", 1);
  Expr out = mutate(no_consts, jitter_only, rng);
  CHECK(node_identical(out, no_consts));
}

TEST_CASE("mutate: constant jitter preserves structure") {
  SearchConfig cfg;
  cfg.mutation_weights = {0, 0, 1, 0};
  std::mt19937_64 rng(11);
  Expr start = parse("2 * x1", 1);
  for (int i = 0; i < 50; ++i) {
    Expr next = mutate(start, cfg, rng);
    REQUIRE(next.kind() == ExprKind::Binary);
    CHECK(next.binary_op() == BinaryOp::Mul);
    CHECK(next.left().kind() == ExprKind::Const);
    CHECK(is_dcp_convex(next));
  }
}

TEST_CASE("crossover: closure and trivial case") {
  SearchConfig cfg;
  std::mt19937_64 rng(13);
  Expr x = parse("x1", 1);
  CHECK(node_identical(crossover(x, x, cfg, rng), x));
  Expr a = parse("exp(x1) + sq(x1)", 1);
  Expr b = parse("max(x1, 0.5) + abs(x1)", 1);
  for (int i = 0; i < 200; ++i) {
    Expr child = crossover(a, b, cfg, rng);
    CHECK(is_dcp_convex(child));
    CHECK(complexity(child) <= cfg.max_complexity);
  }
}

TEST_CASE("fitness: perfect fit, overflow, constant model") {
  SearchConfig cfg;
  Expr truth = parse("abs(x1)", 1);
  Dataset d = dataset_from(truth, 50, -1.0, 1.0, 3);

  const LossInfo perfect = fitness(truth, d, cfg);
  CHECK(perfect.train_loss == 0.0);
  CHECK(perfect.fitness == 0.0);

  Expr exploding = parse("exp(exp(exp(exp(exp(9*x1)))))", 1);
  Dataset wide = dataset_from(parse("abs(x1)", 1), 50, 1.0, 3.0, 4);
  CHECK(std::isinf(fitness(exploding, wide, cfg).train_loss));

  const double mean_y = d.y.mean();
  const double variance = (d.y.array() - mean_y).square().mean();
  const LossInfo constant_model = fitness(Expr::constant(mean_y), d, cfg);
  CHECK(constant_model.train_loss == doctest::Approx(variance).epsilon(1e-12));

  // parsimony penalty is multiplicative
  SearchConfig heavy = cfg;
  heavy.parsimony_coefficient = 0.5;
  Expr off = parse("abs(x1) + 1", 1);
  const LossInfo base = fitness(off, d, cfg);
  const LossInfo penalized = fitness(off, d, heavy);
  CHECK(penalized.fitness ==
        doctest::Approx(base.train_loss * (1.0 + 0.5 * complexity(off))).epsilon(1e-12));
}

TEST_CASE("optimize_constants: recovers a 1-D slope") {
  // least-squares oracle: fitting c*x to noiseless y = 3x gives exactly 3
  SearchConfig cfg;
  Dataset d = dataset_from(parse("3 * x1", 1), 60, -1.0, 1.0, 5);
  Expr start = parse("1 * x1", 1);
  Expr tuned = optimize_constants(start, d, cfg);
  REQUIRE(constants(tuned).size() == 1);
  CHECK(std::abs(constants(tuned)[0] - 3.0) <= 1e-2);

  // no constants: unchanged
  Expr bare = parse("abs(x1)", 1);
  CHECK(node_identical(optimize_constants(bare, d, cfg), bare));

  // never worse than the input
  std::mt19937_64 rng(19);
  for (int i = 0; i < 20; ++i) {
    Expr e = random_expr(cfg, rng, uniform_int(rng, 2, 5));
    const double before = fitness(e, d, cfg).train_loss;
    const double after = fitness(optimize_constants(e, d, cfg), d, cfg).train_loss;
    CHECK(after <= before + 1e-15);
  }
}

TEST_CASE("pareto front: strict dominance pruning") {
  ParetoFront front;
  auto candidate = [](const char* text, double loss) {
    Candidate c;
    c.expr = parse(text, 1);
    c.complexity = complexity(c.expr);
    c.train_loss = loss;
    c.fitness = loss;
    return c;
  };
  front.update(candidate("x1", 4.0));                 // complexity 1
  front.update(candidate("abs(x1)", 2.0));            // complexity 2
  front.update(candidate("abs(x1) + 1", 2.5));        // complexity 4, dominated
  CHECK(front.entries().size() == 2);
  front.update(candidate("abs(x1) + 0.5", 1.0));      // complexity 4, better
  CHECK(front.entries().size() == 3);
  front.update(candidate("sq(x1)", 0.5));             // complexity 2, improves level 2
  // level-2 improvement dominates the complexity-4 entry
  REQUIRE(front.entries().size() == 2);
  CHECK(front.entries().at(2).train_loss == 0.5);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& [c, cand] : front.entries()) {
    CHECK(cand.train_loss < prev);
    prev = cand.train_loss;
  }
}

TEST_CASE("run: recovers y = |x| exactly") {
  Dataset d = dataset_from(parse("abs(x1)", 1), 100, -1.0, 1.0, 7);
  SearchConfig cfg = small_config();
  ParetoFront front = run(cfg, d, 1);
  REQUIRE_FALSE(front.empty());
  bool found = false;
  for (const auto& [c, cand] : front.entries()) {
    CHECK(is_dcp_convex(cand.expr));
    if (c <= 3 && cand.train_loss <= 1e-6) found = true;
  }
  CHECK(found);
}

TEST_CASE("run: deterministic, serial == parallel") {
  Dataset d = dataset_from(parse("exp(x1) + sq(x1)", 1), 80, -1.0, 1.0, 9);
  SearchConfig cfg = small_config(99);
  cfg.generations = 12;
  ParetoFront serial_a = run(cfg, d, 1);
  ParetoFront serial_b = run(cfg, d, 1);
  ParetoFront parallel = run(cfg, d, 4);
  CHECK(front_equal(serial_a, serial_b));
  CHECK(front_equal(serial_a, parallel));
}

TEST_CASE("run: elitism keeps best fitness non-increasing") {
  Dataset d = dataset_from(parse("max(sq(x1), 0.2)", 1), 60, -1.0, 1.0, 21);
  SearchConfig cfg = small_config(3);
  cfg.generations = 20;
  double last = std::numeric_limits<double>::infinity();
  run(cfg, d, 1, [&](int, const Candidate& best) {
    CHECK(best.fitness <= last + 1e-15);
    last = best.fitness;
  });
}

TEST_CASE("run: input validation") {
  SearchConfig cfg;
  Dataset d = dataset_from(parse("abs(x1)", 1), 20, -1.0, 1.0, 2);
  cfg.n_vars = 2;
  CHECK_THROWS_AS(run(cfg, d, 1), std::invalid_argument);
  Dataset empty;
  empty.n_vars = 1;
  cfg.n_vars = 1;
  CHECK_THROWS_AS(run(cfg, empty, 1), std::invalid_argument);
}

TEST_CASE("select_model: knee point, singleton, ties") {
  auto fake = [](int complexity_level, double loss) {
    Candidate c;
    c.expr = Expr::constant(1.0);
    c.complexity = complexity_level;
    c.train_loss = loss;
    c.fitness = loss;
    return c;
  };
  ParetoFront front;
  front.update(fake(1, 100.0));
  front.update(fake(5, 0.01));
  front.update(fake(20, 0.009));
  // slopes: (ln 100 - ln 0.01)/4 = 2.30 vs (ln 0.01 - ln 0.009)/15 = 0.007
  CHECK(select_model(front).complexity == 5);

  ParetoFront single;
  single.update(fake(3, 1.0));
  CHECK(select_model(single).complexity == 3);

  // equal slopes (each step halves the loss): lower complexity wins
  ParetoFront tie;
  tie.update(fake(1, 4.0));
  tie.update(fake(2, 2.0));
  tie.update(fake(3, 1.0));
  CHECK(select_model(tie).complexity == 2);

  CHECK_THROWS_AS(select_model(ParetoFront{}), std::invalid_argument);
}

TEST_CASE("run outputs pass the numerical convexity oracle") {
  Dataset d = dataset_from(parse("exp(x1 + max(x1, -5*x1) + sq(x1)) + 4*x1", 1), 80, -1.0, 1.0,
                           31);
  SearchConfig cfg = small_config(55);
  cfg.generations = 15;
  ParetoFront front = run(cfg, d, 1);
  std::mt19937_64 rng(77);
  for (const auto& [c, cand] : front.entries()) {
    const auto check =
        testutil::midpoint_convexity(testutil::expr_fn(cand.expr), 1, -2.0, 2.0, 1000, rng);
    INFO("expr: ", format(cand.expr));
    CHECK(check.violations == 0);
  }
}
