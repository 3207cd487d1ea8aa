#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dcpsr/expr.hpp"

namespace dcpsr {

/// Sampling domain {x : A_dom x <= b_dom} intersected with an axis-aligned
/// bounding box. A_dom may have zero rows (box only).
struct Polytope {
  Eigen::MatrixXd A_dom;  // m x n, m >= 0
  Eigen::VectorXd b_dom;  // m
  Eigen::VectorXd lo;     // box, n
  Eigen::VectorXd hi;

  static Polytope box(Eigen::VectorXd lo, Eigen::VectorXd hi);
  int n_vars() const { return static_cast<int>(lo.size()); }
  void validate() const;  // throws std::invalid_argument
};

struct DatasetMeta {
  std::string truth_text;  // ground-truth expression in the parser grammar
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct Dataset {
  Eigen::MatrixXd X;  // N x n_vars
  Eigen::VectorXd y;  // N
  int n_vars = 0;
  std::optional<DatasetMeta> meta;

  Eigen::Index size() const { return X.rows(); }
};

/// Uniform samples over the feasible region, by rejection from the box.
/// Throws when 10^6 consecutive proposals are all rejected ("empty or thin
/// polytope").
Eigen::MatrixXd sample_polytope(const Polytope& p, int count, std::mt19937_64& rng);

/// y_i = truth(x_i) + sigma * g_i with g_i iid standard normal from the
/// seeded stream. The truth must pass is_dcp_convex.
Dataset generate(const Expr& truth, const Polytope& p, int count, double sigma,
                 std::uint64_t seed);

/// Seeded shuffle; first ceil(fraction * N) rows go to train. Meta is
/// copied to both parts.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed);

/// CSV with header "x1,...,xn,y", one row per sample, 17 significant
/// digits, and "#"-prefixed metadata comment lines.
void save_csv(const Dataset& data, const std::string& path);
Dataset load_csv(const std::string& path, int n_vars);

/// Variable count announced by a CSV header (for callers that do not know
/// it up front).
int csv_n_vars(const std::string& path);

/// Named ground-truth functions for experiments; each is checked
/// DCP-convex on first use.
struct TruthSpec {
  std::string name;
  std::string text;
  int n_vars;
};
const std::vector<TruthSpec>& builtin_truths();
const TruthSpec* find_truth(const std::string& name);

}  // namespace dcpsr
