#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dcpsr/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dcpsr: discover globally convex expressions from data"};
  app.require_subcommand(1);

  // analyze
  std::string analyze_expr;
  int analyze_vars = 1;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Print the curvature trace of an expression (exit 0 accepted, 2 rejected)");
  analyze->add_option("expression", analyze_expr, "expression text, e.g. \"abs(x1) + sq(x1)\"")
      ->required();
  analyze->add_option("--vars", analyze_vars, "number of variables (default 1)");

  // gen
  dcpsr::cli::GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic dataset CSV");
  gen->add_option("--truth", gen_args.truth, "builtin truth name or expression text")->required();
  gen->add_option("--count", gen_args.count, "number of samples (default 200)");
  gen->add_option("--sigma", gen_args.sigma, "Gaussian noise sigma (default 0.01)");
  gen->add_option("--seed", gen_args.seed, "RNG seed (default 0)");
  gen->add_option("--box", gen_args.box,
                  "sampling box as lo hi per dimension (default -1 1 per dimension)");
  gen->add_option("--out", gen_args.out_path, "output CSV path")->required();

  // fit
  dcpsr::cli::FitArgs fit_args;
  std::optional<std::uint64_t> fit_seed, fit_split_seed;
  CLI::App* fit = app.add_subcommand("fit", "Run the convex symbolic regression search");
  fit->add_option("--data", fit_args.data_path, "input dataset CSV")->required();
  fit->add_option("--config", fit_args.config_path, "search config file (key = value lines)");
  fit->add_option("--seed", fit_seed, "override rng_seed");
  fit->add_option("--train-fraction", fit_args.train_fraction,
                  "fraction of rows used for training (default 0.8)");
  fit->add_option("--split-seed", fit_split_seed, "seed for the train/validation split");
  fit->add_option("--out", fit_args.out_path, "output report JSON path")->required();
  fit->add_option("--predictions", fit_args.predictions_path, "optional predictions CSV path");
  fit->add_option("--front-csv", fit_args.front_csv_path, "optional Pareto front CSV path");
  fit->add_option("--threads", fit_args.threads, "evaluation threads (0 = all cores)");

  // baseline
  dcpsr::cli::BaselineArgs baseline_args;
  CLI::App* baseline = app.add_subcommand("baseline", "Fit the PSD-constrained quadratic");
  baseline->add_option("--data", baseline_args.data_path, "input dataset CSV")->required();
  baseline->add_option("--out", baseline_args.out_path, "output report JSON path")->required();

  // compare
  dcpsr::cli::CompareArgs compare_args;
  std::optional<std::uint64_t> compare_seed, compare_split_seed;
  CLI::App* compare =
      app.add_subcommand("compare", "Fit both models and report the dominance verdict");
  compare->add_option("--data", compare_args.data_path, "input dataset CSV")->required();
  compare->add_option("--config", compare_args.config_path, "search config file");
  compare->add_option("--seed", compare_seed, "override rng_seed");
  compare->add_option("--train-fraction", compare_args.train_fraction,
                      "fraction of rows used for training (default 0.8)");
  compare->add_option("--split-seed", compare_split_seed, "seed for the train/validation split");
  compare->add_option("--grid", compare_args.grid,
                      "grid size for the 1-D plot CSV (default 200, 0 disables)");
  compare->add_option("--out", compare_args.out_path, "output report JSON path")->required();
  compare->add_option("--plot", compare_args.plot_path,
                      "plot CSV path (default: <out>_plot.csv for 1-D data)");
  compare->add_option("--threads", compare_args.threads, "evaluation threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (app.got_subcommand(analyze)) {
    return dcpsr::cli::cmd_analyze(analyze_expr, analyze_vars, std::cout, std::cerr);
  }
  if (app.got_subcommand(gen)) {
    return dcpsr::cli::cmd_gen(gen_args, std::cout, std::cerr);
  }
  if (app.got_subcommand(fit)) {
    fit_args.seed = fit_seed;
    fit_args.split_seed = fit_split_seed;
    return dcpsr::cli::cmd_fit(fit_args, std::cout, std::cerr);
  }
  if (app.got_subcommand(baseline)) {
    return dcpsr::cli::cmd_baseline(baseline_args, std::cout, std::cerr);
  }
  if (app.got_subcommand(compare)) {
    compare_args.seed = compare_seed;
    compare_args.split_seed = compare_split_seed;
    return dcpsr::cli::cmd_compare(compare_args, std::cout, std::cerr);
  }
  return 1;
}
