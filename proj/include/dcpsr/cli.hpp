#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dcpsr/search.hpp"

namespace dcpsr::cli {

// Exit codes shared by every subcommand: 0 success (or analyze accepted),
// 2 analyze rejected, 1 any error.

int cmd_analyze(const std::string& expr_text, int n_vars, std::ostream& out, std::ostream& err);

struct GenArgs {
  std::string truth;  // builtin name or expression text
  int count = 200;
  double sigma = 0.01;
  std::uint64_t seed = 0;
  std::vector<double> box;  // flattened lo/hi pairs; empty = [-1,1] per dim
  std::string out_path;
};
int cmd_gen(const GenArgs& args, std::ostream& out, std::ostream& err);

struct FitArgs {
  std::string data_path;
  std::string config_path;  // optional
  std::optional<std::uint64_t> seed;
  double train_fraction = 0.8;
  std::optional<std::uint64_t> split_seed;  // default: rng_seed
  std::string out_path;
  std::string predictions_path;  // optional
  std::string front_csv_path;    // optional
  int threads = 0;               // 0 = hardware concurrency
};
int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);

struct BaselineArgs {
  std::string data_path;
  std::string out_path;
};
int cmd_baseline(const BaselineArgs& args, std::ostream& out, std::ostream& err);

struct CompareArgs {
  std::string data_path;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  double train_fraction = 0.8;
  std::optional<std::uint64_t> split_seed;
  int grid = 200;
  std::string out_path;
  std::string plot_path;  // optional; derived from out_path when empty
  int threads = 0;
};
int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err);

/// Line-oriented "key = value" config with exactly the SearchConfig field
/// names (map entries as mutation_weights.<op>); unknown keys are errors.
/// When data_n_vars is given, an n_vars key in the file must agree with it.
SearchConfig load_config_file(const std::string& path, std::optional<int> data_n_vars = {});

/// The comparison criterion: the symbolic model wins when it has strictly
/// lower loss than the quadratic baseline and strictly fewer nodes than the
/// quadratic has parameters.
bool dominates(double sr_loss, int sr_complexity, double quad_loss, int n_vars);

}  // namespace dcpsr::cli
