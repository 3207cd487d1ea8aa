#include "dcpsr/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>

#include "dcpsr/curvature.hpp"
#include "dcpsr/rng.hpp"

namespace dcpsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void SearchConfig::validate() const {
  if (population_size < 2) throw std::invalid_argument("population_size must be >= 2");
  if (generations < 0) throw std::invalid_argument("generations must be >= 0");
  if (tournament_size < 1 || tournament_size > population_size) {
    throw std::invalid_argument("tournament_size must be in [1, population_size]");
  }
  if (max_complexity < 3) throw std::invalid_argument("max_complexity must be >= 3");
  if (parsimony_coefficient < 0) throw std::invalid_argument("parsimony_coefficient must be >= 0");
  const MutationWeights& w = mutation_weights;
  if (w.point < 0 || w.subtree < 0 || w.constant_jitter < 0 || w.hoist < 0) {
    throw std::invalid_argument("mutation weights must be nonnegative");
  }
  if (w.point + w.subtree + w.constant_jitter + w.hoist <= 0) {
    throw std::invalid_argument("mutation weights must not all be zero");
  }
  if (crossover_probability < 0 || crossover_probability > 1) {
    throw std::invalid_argument("crossover_probability must be in [0, 1]");
  }
  if (constant_opt_iters < 0) throw std::invalid_argument("constant_opt_iters must be >= 0");
  if (rejection_retry_limit < 0) throw std::invalid_argument("rejection_retry_limit must be >= 0");
  if (n_vars < 1) throw std::invalid_argument("n_vars must be >= 1");
}

void ParetoFront::update(const Candidate& candidate) {
  auto it = entries_.find(candidate.complexity);
  if (it != entries_.end() && it->second.train_loss <= candidate.train_loss) {
    return;  // incumbent is at least as good
  }
  entries_[candidate.complexity] = candidate;
  prune();
}

void ParetoFront::prune() {
  double best = kInf;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.train_loss < best) {
      best = it->second.train_loss;
      ++it;
    } else {
      it = entries_.erase(it);  // dominated by a simpler entry
    }
  }
}

LossInfo fitness(const Expr& expr, const Dataset& data, const SearchConfig& config) {
  if (data.size() == 0) throw std::invalid_argument("fitness: empty dataset");
  const Eigen::VectorXd pred = evaluate_all(expr, data.X);
  double loss = (pred - data.y).squaredNorm() / static_cast<double>(data.size());
  if (!std::isfinite(loss)) loss = kInf;
  const double penalty = 1.0 + config.parsimony_coefficient * static_cast<double>(complexity(expr));
  return {loss, loss * penalty};
}

namespace {

Expr random_leaf(const SearchConfig& config, std::mt19937_64& rng) {
  if (uniform01(rng) < 0.6) {
    return Expr::variable(uniform_int(rng, 0, config.n_vars - 1));
  }
  return Expr::constant(uniform_real(rng, -5.0, 5.0));
}

Expr grow(const SearchConfig& config, std::mt19937_64& rng, int depth_budget) {
  if (depth_budget <= 1) return random_leaf(config, rng);
  const double r = uniform01(rng);
  if (r < 0.25) return random_leaf(config, rng);
  if (r < 0.60) {
    static constexpr UnaryOp kUnary[] = {UnaryOp::Exp, UnaryOp::Square, UnaryOp::Abs};
    return Expr::unary(kUnary[uniform_int(rng, 0, 2)], grow(config, rng, depth_budget - 1));
  }
  static constexpr BinaryOp kBinary[] = {BinaryOp::Add, BinaryOp::Mul, BinaryOp::Max};
  const BinaryOp op = kBinary[uniform_int(rng, 0, 2)];
  if (op == BinaryOp::Mul && uniform01(rng) < 0.85) {
    // multiplication is only DCP as constant scaling, so bias one side
    Expr scale = Expr::constant(uniform_real(rng, -5.0, 5.0));
    Expr body = grow(config, rng, depth_budget - 1);
    if (uniform01(rng) < 0.5) return Expr::binary(op, std::move(scale), std::move(body));
    return Expr::binary(op, std::move(body), std::move(scale));
  }
  Expr l = grow(config, rng, depth_budget - 1);
  Expr r2 = grow(config, rng, depth_budget - 1);
  return Expr::binary(op, std::move(l), std::move(r2));
}

bool admissible(const Expr& e, const SearchConfig& config) {
  return complexity(e) <= config.max_complexity && is_dcp_convex(e);
}

Expr random_affine(const SearchConfig& config, std::mt19937_64& rng) {
  return Expr::binary(BinaryOp::Mul, Expr::constant(uniform_real(rng, -5.0, 5.0)),
                      Expr::variable(uniform_int(rng, 0, config.n_vars - 1)));
}

}  // namespace

Expr random_expr(const SearchConfig& config, std::mt19937_64& rng, int depth_budget) {
  if (depth_budget < 1) throw std::invalid_argument("depth_budget must be >= 1");
  for (int attempt = 0; attempt <= config.rejection_retry_limit; ++attempt) {
    Expr e = grow(config, rng, depth_budget);
    if (admissible(e, config)) return e;
  }
  return random_affine(config, rng);  // guaranteed valid
}

namespace {

enum class MutationKind { Point, Subtree, ConstantJitter, Hoist };

MutationKind draw_mutation(const MutationWeights& w, std::mt19937_64& rng) {
  const double total = w.point + w.subtree + w.constant_jitter + w.hoist;
  double r = uniform01(rng) * total;
  if ((r -= w.point) < 0) return MutationKind::Point;
  if ((r -= w.subtree) < 0) return MutationKind::Subtree;
  if ((r -= w.constant_jitter) < 0) return MutationKind::ConstantJitter;
  return MutationKind::Hoist;
}

Expr point_replacement(const Expr& node, const SearchConfig& config, std::mt19937_64& rng) {
  switch (node.kind()) {
    case ExprKind::Const:
      return Expr::constant(uniform_real(rng, -5.0, 5.0));
    case ExprKind::Var:
      return Expr::variable(uniform_int(rng, 0, config.n_vars - 1));
    case ExprKind::Unary: {
      static constexpr UnaryOp kUnary[] = {UnaryOp::Exp, UnaryOp::Square, UnaryOp::Abs};
      UnaryOp op = kUnary[uniform_int(rng, 0, 2)];
      while (op == node.unary_op()) op = kUnary[uniform_int(rng, 0, 2)];
      return Expr::unary(op, node.child());
    }
    case ExprKind::Binary: {
      static constexpr BinaryOp kBinary[] = {BinaryOp::Add, BinaryOp::Mul, BinaryOp::Max};
      BinaryOp op = kBinary[uniform_int(rng, 0, 2)];
      while (op == node.binary_op()) op = kBinary[uniform_int(rng, 0, 2)];
      return Expr::binary(op, node.left(), node.right());
    }
  }
  throw std::logic_error("corrupt expression node");
}

// Applies one drawn operator; returns an empty handle when the operator is
// not applicable (e.g. jitter on a constant-free tree).
Expr apply_mutation(const Expr& expr, const SearchConfig& config, std::mt19937_64& rng) {
  const int n_nodes = complexity(expr);
  switch (draw_mutation(config.mutation_weights, rng)) {
    case MutationKind::Point: {
      const int target = uniform_int(rng, 0, n_nodes - 1);
      return replace_subtree(expr, target, point_replacement(subtree(expr, target), config, rng));
    }
    case MutationKind::Subtree: {
      const int target = uniform_int(rng, 0, n_nodes - 1);
      const int budget = uniform_int(rng, 1, 4);
      return replace_subtree(expr, target, grow(config, rng, budget));
    }
    case MutationKind::ConstantJitter: {
      std::vector<double> values = constants(expr);
      if (values.empty()) return Expr{};
      const int k = uniform_int(rng, 0, static_cast<int>(values.size()) - 1);
      if (values[static_cast<std::size_t>(k)] == 0.0) {
        values[static_cast<std::size_t>(k)] = standard_normal(rng);
      } else {
        values[static_cast<std::size_t>(k)] *= std::exp(0.5 * standard_normal(rng));
      }
      if (!std::isfinite(values[static_cast<std::size_t>(k)])) return Expr{};
      return with_constants(expr, values);
    }
    case MutationKind::Hoist:
      return subtree(expr, uniform_int(rng, 0, n_nodes - 1));
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Expr mutate(const Expr& expr, const SearchConfig& config, std::mt19937_64& rng) {
  for (int attempt = 0; attempt <= config.rejection_retry_limit; ++attempt) {
    Expr out = apply_mutation(expr, config, rng);
    if (out.valid() && admissible(out, config)) return out;
  }
  return expr;  // keep the parent
}

Expr crossover(const Expr& a, const Expr& b, const SearchConfig& config, std::mt19937_64& rng) {
  for (int attempt = 0; attempt <= config.rejection_retry_limit; ++attempt) {
    const int at = uniform_int(rng, 0, complexity(a) - 1);
    const int from = uniform_int(rng, 0, complexity(b) - 1);
    Expr out = replace_subtree(a, at, subtree(b, from));
    if (admissible(out, config)) return out;
  }
  return a;
}

namespace {

int sign_class(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// Coordinate descent with a golden-section line search per constant; the
// bracket is centered on the current value and halves every round.
Expr polish_constants(const Expr& expr, const Dataset& data, const SearchConfig& config,
                      int rounds, double initial_half_width, int max_line_iters = 20) {
  std::vector<double> values = constants(expr);
  if (values.empty() || rounds == 0) return expr;

  // Changing a constant's sign class can invalidate the curvature
  // certificate (the scaling rules are sign-mediated). Curvature depends on
  // constants only through their sign class, so the DCP check only has to
  // run when a probe crosses zero relative to the last accepted vector;
  // infeasible probes get an infinite loss and can never be selected.
  std::vector<int> accepted_signs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) accepted_signs[i] = sign_class(values[i]);

  const auto loss_at = [&](const std::vector<double>& v, std::size_t changed) {
    const Expr probe = with_constants(expr, v);
    if (sign_class(v[changed]) != accepted_signs[changed] && !is_dcp_convex(probe)) {
      return kInf;
    }
    return fitness(probe, data, config).train_loss;
  };
  double best_loss = fitness(expr, data, config).train_loss;

  constexpr double kInvPhi = 0.6180339887498949;
  double half_width = initial_half_width;
  for (int round = 0; round < rounds; ++round) {
    for (std::size_t k = 0; k < values.size(); ++k) {
      double lo = values[k] - half_width;
      double hi = values[k] + half_width;
      std::vector<double> probe = values;
      const auto eval_coord = [&](double t) {
        probe[k] = t;
        return loss_at(probe, k);
      };
      double c = hi - kInvPhi * (hi - lo);
      double d = lo + kInvPhi * (hi - lo);
      double fc = eval_coord(c);
      double fd = eval_coord(d);
      double arg_best = fc < fd ? c : d;
      double val_best = std::min(fc, fd);
      for (int it = 0; it < max_line_iters && hi - lo > 1e-12; ++it) {
        if (fc < fd) {
          hi = d;
          d = c;
          fd = fc;
          c = hi - kInvPhi * (hi - lo);
          fc = eval_coord(c);
        } else {
          lo = c;
          c = d;
          fc = fd;
          d = lo + kInvPhi * (hi - lo);
          fd = eval_coord(d);
        }
        if (std::min(fc, fd) < val_best) {
          val_best = std::min(fc, fd);
          arg_best = fc < fd ? c : d;
        }
      }
      if (val_best < best_loss) {
        values[k] = arg_best;
        accepted_signs[k] = sign_class(arg_best);
        best_loss = val_best;
      }
    }
    half_width *= 0.5;
  }
  return with_constants(expr, values);
}

// Structure fingerprint with constant values masked out; used to decide
// which newborns deserve a constant fit.
void shape_key_into(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case ExprKind::Const:
      out.push_back('C');
      return;
    case ExprKind::Var:
      out.push_back('x');
      out.append(std::to_string(e.var_index()));
      return;
    case ExprKind::Unary:
      out.push_back(e.unary_op() == UnaryOp::Exp ? 'e'
                    : e.unary_op() == UnaryOp::Square ? 's'
                                                      : 'a');
      out.push_back('(');
      shape_key_into(e.child(), out);
      out.push_back(')');
      return;
    case ExprKind::Binary:
      out.push_back(e.binary_op() == BinaryOp::Add ? '+'
                    : e.binary_op() == BinaryOp::Mul ? '*'
                                                     : 'm');
      out.push_back('(');
      shape_key_into(e.left(), out);
      out.push_back(',');
      shape_key_into(e.right(), out);
      out.push_back(')');
      return;
  }
}

std::string shape_key(const Expr& e) {
  std::string out;
  shape_key_into(e, out);
  return out;
}

}  // namespace

Expr optimize_constants(const Expr& expr, const Dataset& data, const SearchConfig& config) {
  // bracket of width 2 around each current value
  return polish_constants(expr, data, config, config.constant_opt_iters, 1.0);
}

namespace {

int tournament(const std::vector<Candidate>& pop, const SearchConfig& config,
               std::mt19937_64& rng) {
  int best = uniform_int(rng, 0, static_cast<int>(pop.size()) - 1);
  for (int i = 1; i < config.tournament_size; ++i) {
    const int challenger = uniform_int(rng, 0, static_cast<int>(pop.size()) - 1);
    if (pop[static_cast<std::size_t>(challenger)].fitness <
        pop[static_cast<std::size_t>(best)].fitness) {
      best = challenger;
    }
  }
  return best;
}

void evaluate_candidate(Candidate& cand, const Dataset& data, const SearchConfig& config) {
  const LossInfo info = fitness(cand.expr, data, config);
  cand.train_loss = info.train_loss;
  cand.fitness = info.fitness;
  cand.complexity = complexity(cand.expr);
}

// Per-candidate losses are independent, so parallel evaluation is
// bit-identical to the serial loop.
void evaluate_population(std::vector<Candidate>& pop, const Dataset& data,
                         const SearchConfig& config, int n_threads) {
  const std::size_t n = pop.size();
  if (n_threads <= 1 || n < 2) {
    for (Candidate& cand : pop) evaluate_candidate(cand, data, config);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(n_threads), n);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        evaluate_candidate(pop[i], data, config);
      }
    });
  }
  for (std::thread& t : threads) t.join();
}

int best_index(const std::vector<Candidate>& pop) {
  int best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i) {
    if (pop[i].fitness < pop[static_cast<std::size_t>(best)].fitness) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

void verify_closure(const std::vector<Candidate>& pop) {
#ifndef NDEBUG
  for (const Candidate& cand : pop) {
    if (!is_dcp_convex(cand.expr)) {
      throw std::logic_error("population closure violated: " + format(cand.expr));
    }
  }
#else
  // sampled check in release builds
  const std::size_t stride = std::max<std::size_t>(1, pop.size() / 8);
  for (std::size_t i = 0; i < pop.size(); i += stride) {
    if (!is_dcp_convex(pop[i].expr)) {
      throw std::logic_error("population closure violated: " + format(pop[i].expr));
    }
  }
#endif
}

}  // namespace

ParetoFront run(const SearchConfig& config, const Dataset& train, int n_threads,
                const GenerationObserver& observer) {
  config.validate();
  if (train.size() == 0) throw std::invalid_argument("run: empty dataset");
  if (train.n_vars != config.n_vars) {
    throw std::invalid_argument("run: dataset width does not match config.n_vars");
  }
  if (n_threads <= 0) {
    n_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }

  const int pop_size = config.population_size;
  std::vector<Candidate> pop(static_cast<std::size_t>(pop_size));
  for (int slot = 0; slot < pop_size; ++slot) {
    std::mt19937_64 rng = stream_rng(config.rng_seed, 0, static_cast<std::uint64_t>(slot));
    const int budget = 1 + slot % 5;  // ramped initial depths
    pop[static_cast<std::size_t>(slot)].expr = random_expr(config, rng, budget);
  }

  // Unseen structures get their constants fitted once, on a coarse budget
  // and a strided row subsample (best unpolished fitness first, capped per
  // generation). A sound structure born with poor constants would
  // otherwise score badly and vanish before the per-generation polish ever
  // reaches it. The polished tree only replaces the newborn when it
  // improves the full-data loss.
  constexpr int kNewbornPolishCap = 128;
  constexpr Eigen::Index kNewbornPolishRows = 64;
  Dataset subsample;
  {
    const Eigen::Index stride = std::max<Eigen::Index>(1, train.size() / kNewbornPolishRows);
    const Eigen::Index rows = (train.size() + stride - 1) / stride;
    subsample.n_vars = train.n_vars;
    subsample.X.resize(rows, train.X.cols());
    subsample.y.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      subsample.X.row(i) = train.X.row(i * stride);
      subsample.y[i] = train.y[i * stride];
    }
  }
  std::unordered_set<std::string> shapes_seen;
  const auto polish_newborns = [&](std::vector<Candidate>& generation) {
    std::vector<std::pair<std::string, int>> unseen;
    for (int slot = 0; slot < static_cast<int>(generation.size()); ++slot) {
      const Candidate& cand = generation[static_cast<std::size_t>(slot)];
      std::string key = shape_key(cand.expr);
      if (shapes_seen.count(key) != 0) continue;
      if (constants(cand.expr).empty()) {
        shapes_seen.insert(std::move(key));  // nothing to fit
        continue;
      }
      unseen.emplace_back(std::move(key), slot);
    }
    std::sort(unseen.begin(), unseen.end(), [&](const auto& a, const auto& b) {
      const double fa = generation[static_cast<std::size_t>(a.second)].fitness;
      const double fb = generation[static_cast<std::size_t>(b.second)].fitness;
      if (fa != fb) return fa < fb;
      return a.second < b.second;
    });
    int polished = 0;
    for (const auto& [key, slot] : unseen) {
      if (polished >= kNewbornPolishCap) break;
      if (!shapes_seen.insert(key).second) continue;  // duplicate shape this generation
      Candidate& cand = generation[static_cast<std::size_t>(slot)];
      Expr better = polish_constants(cand.expr, subsample, config, 4, 4.0, 10);
      if (!node_identical(better, cand.expr)) {
        Candidate probe = cand;
        probe.expr = std::move(better);
        evaluate_candidate(probe, train, config);
        if (probe.train_loss < cand.train_loss) cand = std::move(probe);
      }
      ++polished;
    }
  };

  evaluate_population(pop, train, config, n_threads);
  polish_newborns(pop);
  ParetoFront front;
  for (const Candidate& cand : pop) front.update(cand);
  verify_closure(pop);

  std::vector<Candidate> next(static_cast<std::size_t>(pop_size));
  for (int gen = 1; gen <= config.generations; ++gen) {
    next[0] = pop[static_cast<std::size_t>(best_index(pop))];  // elitism
    for (int slot = 1; slot < pop_size; ++slot) {
      std::mt19937_64 rng =
          stream_rng(config.rng_seed, static_cast<std::uint64_t>(gen), static_cast<std::uint64_t>(slot));
      Expr child;
      if (uniform01(rng) < config.crossover_probability) {
        const int pa = tournament(pop, config, rng);
        const int pb = tournament(pop, config, rng);
        child = crossover(pop[static_cast<std::size_t>(pa)].expr,
                          pop[static_cast<std::size_t>(pb)].expr, config, rng);
      } else {
        const int pa = tournament(pop, config, rng);
        child = mutate(pop[static_cast<std::size_t>(pa)].expr, config, rng);
      }
      next[static_cast<std::size_t>(slot)].expr = std::move(child);
    }
    evaluate_population(next, train, config, n_threads);
    polish_newborns(next);

    // polish the generation best with constant optimization
    const int best = best_index(next);
    Candidate& champion = next[static_cast<std::size_t>(best)];
    Expr polished = optimize_constants(champion.expr, train, config);
    if (!node_identical(polished, champion.expr)) {
      champion.expr = std::move(polished);
      evaluate_candidate(champion, train, config);
    }

    for (const Candidate& cand : next) front.update(cand);
    verify_closure(next);
    if (observer) observer(gen, next[static_cast<std::size_t>(best_index(next))]);
    pop.swap(next);
  }
  return front;
}

Candidate select_model(const ParetoFront& front) {
  if (front.empty()) throw std::invalid_argument("select_model: empty front");
  const auto& entries = front.entries();
  if (entries.size() == 1) return entries.begin()->second;

  const auto log_loss = [](double loss) { return std::log(std::max(loss, 1e-300)); };
  auto prev = entries.begin();
  auto best = std::next(prev);
  double best_slope = -kInf;
  for (auto it = std::next(entries.begin()); it != entries.end(); ++it) {
    const double drop = log_loss(prev->second.train_loss) - log_loss(it->second.train_loss);
    const double slope = drop / static_cast<double>(it->first - prev->first);
    if (slope > best_slope) {  // ties keep the earlier (lower-complexity) entry
      best_slope = slope;
      best = it;
    }
    prev = it;
  }
  return best->second;
}

}  // namespace dcpsr
