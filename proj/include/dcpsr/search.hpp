#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "dcpsr/datagen.hpp"
#include "dcpsr/expr.hpp"

namespace dcpsr {

struct MutationWeights {
  double point = 1.0;
  double subtree = 1.0;
  double constant_jitter = 1.0;
  double hoist = 0.5;
};

struct SearchConfig {
  int population_size = 500;
  int generations = 100;
  int tournament_size = 5;
  int max_complexity = 25;
  double parsimony_coefficient = 0.001;
  MutationWeights mutation_weights;
  double crossover_probability = 0.7;
  int constant_opt_iters = 20;
  int rejection_retry_limit = 20;
  std::uint64_t rng_seed = 0;
  int n_vars = 1;

  void validate() const;  // throws std::invalid_argument
};

/// Expression with its training loss, node count and parsimony-penalized
/// fitness. Every candidate the engine retains passes is_dcp_convex.
struct Candidate {
  Expr expr;
  double train_loss = 0.0;
  int complexity = 0;
  double fitness = 0.0;
};

/// Complexity level -> best candidate seen at that complexity, pruned so
/// train_loss is strictly decreasing as complexity increases.
class ParetoFront {
 public:
  void update(const Candidate& candidate);
  const std::map<int, Candidate>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  void prune();
  std::map<int, Candidate> entries_;
};

struct LossInfo {
  double train_loss = 0.0;
  double fitness = 0.0;
};

/// Mean squared error plus the multiplicative parsimony penalty.
/// Non-finite predictions yield +infinity.
LossInfo fitness(const Expr& expr, const Dataset& data, const SearchConfig& config);

/// Grow-style random tree, resampled until it is DCP-convex and within the
/// complexity budget; falls back to a random affine expression when the
/// retry budget is exhausted.
Expr random_expr(const SearchConfig& config, std::mt19937_64& rng, int depth_budget);

/// One mutation operator drawn by weight (point / subtree /
/// constant_jitter / hoist), with DCP and complexity checks; returns the
/// input unchanged when retries are exhausted.
Expr mutate(const Expr& expr, const SearchConfig& config, std::mt19937_64& rng);

/// Swaps a random subtree of `a` with one of `b`; same retry/fallback
/// policy as mutate (fallback returns `a`).
Expr crossover(const Expr& a, const Expr& b, const SearchConfig& config, std::mt19937_64& rng);

/// Derivative-free coordinate descent on the constant vector: per-round,
/// per-coordinate golden-section search in a bracket that starts at width 2
/// and halves each round. Never returns a tree with worse train loss.
Expr optimize_constants(const Expr& expr, const Dataset& data, const SearchConfig& config);

using GenerationObserver = std::function<void(int generation, const Candidate& best)>;

/// Full constrained evolutionary search. Deterministic for a fixed
/// (config, data) regardless of n_threads (0 = hardware concurrency).
ParetoFront run(const SearchConfig& config, const Dataset& train, int n_threads = 0,
                const GenerationObserver& observer = {});

/// Knee of the front: the entry with the steepest drop in log-loss per
/// unit complexity relative to its predecessor; ties go to the lower
/// complexity. A single-entry front returns that entry.
Candidate select_model(const ParetoFront& front);

}  // namespace dcpsr
