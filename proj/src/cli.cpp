#include "dcpsr/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dcpsr/curvature.hpp"
#include "dcpsr/parse.hpp"
#include "dcpsr/quadfit.hpp"

namespace dcpsr::cli {

namespace {

using json = nlohmann::ordered_json;

std::string number17(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double expr_mse(const Expr& e, const Dataset& data) {
  const Eigen::VectorXd pred = evaluate_all(e, data.X);
  const double loss = (pred - data.y).squaredNorm() / static_cast<double>(data.size());
  return std::isfinite(loss) ? loss : std::numeric_limits<double>::infinity();
}

json config_json(const SearchConfig& cfg) {
  json j;
  j["population_size"] = cfg.population_size;
  j["generations"] = cfg.generations;
  j["tournament_size"] = cfg.tournament_size;
  j["max_complexity"] = cfg.max_complexity;
  j["parsimony_coefficient"] = cfg.parsimony_coefficient;
  j["mutation_weights"] = {{"point", cfg.mutation_weights.point},
                           {"subtree", cfg.mutation_weights.subtree},
                           {"constant_jitter", cfg.mutation_weights.constant_jitter},
                           {"hoist", cfg.mutation_weights.hoist}};
  j["crossover_probability"] = cfg.crossover_probability;
  j["constant_opt_iters"] = cfg.constant_opt_iters;
  j["rejection_retry_limit"] = cfg.rejection_retry_limit;
  j["rng_seed"] = cfg.rng_seed;
  j["n_vars"] = cfg.n_vars;
  return j;
}

json entry_json(const Candidate& cand, double validation_loss) {
  json j;
  j["complexity"] = cand.complexity;
  j["train_loss"] = cand.train_loss;
  j["validation_loss"] = validation_loss;
  j["expression"] = format(cand.expr);
  return j;
}

json front_json(const ParetoFront& front, const Dataset& validation) {
  json arr = json::array();
  for (const auto& [complexity_level, cand] : front.entries()) {
    arr.push_back(entry_json(cand, expr_mse(cand.expr, validation)));
  }
  return arr;
}

json quad_json(const QuadFitReport& report) {
  json j;
  const QuadModel& m = report.model;
  j["n"] = m.n_vars();
  json a_rows = json::array();
  for (Eigen::Index i = 0; i < m.A.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.A.cols(); ++k) a_rows.push_back(m.A(i, k));
  }
  j["A"] = a_rows;  // row-major
  j["b"] = std::vector<double>(m.b.data(), m.b.data() + m.b.size());
  j["c"] = m.c;
  j["train_mse"] = report.train_mse;
  j["iterations"] = report.iterations;
  j["projection_applied"] = report.projection_applied;
  j["param_count"] = param_count(m.n_vars());
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

void print_front_table(const ParetoFront& front, const Dataset& validation, std::ostream& out) {
  out << std::setw(10) << "complexity" << "  " << std::setw(13) << "train_loss" << "  "
      << std::setw(15) << "validation_loss" << "  expression\n";
  for (const auto& [complexity_level, cand] : front.entries()) {
    std::ostringstream train, val;
    train << std::scientific << std::setprecision(4) << cand.train_loss;
    val << std::scientific << std::setprecision(4) << expr_mse(cand.expr, validation);
    out << std::setw(10) << complexity_level << "  " << std::setw(13) << train.str() << "  "
        << std::setw(15) << val.str() << "  " << format(cand.expr) << "\n";
  }
}

struct SplitData {
  Dataset full;
  Dataset train;
  Dataset validation;
  std::uint64_t split_seed = 0;
};

SplitData load_and_split(const std::string& path, double train_fraction,
                         std::uint64_t split_seed) {
  SplitData s;
  s.full = load_csv(path, csv_n_vars(path));
  s.split_seed = split_seed;
  auto [train, validation] = split(s.full, train_fraction, split_seed);
  s.train = std::move(train);
  s.validation = std::move(validation);
  return s;
}

json data_json(const SplitData& s, double train_fraction) {
  json j;
  j["n_vars"] = s.full.n_vars;
  j["n_samples"] = s.full.size();
  j["n_train"] = s.train.size();
  j["n_validation"] = s.validation.size();
  j["train_fraction"] = train_fraction;
  j["split_seed"] = s.split_seed;
  if (s.full.meta && !s.full.meta->truth_text.empty()) {
    j["truth"] = s.full.meta->truth_text;
  }
  return j;
}

void write_front_csv(const std::string& path, const ParetoFront& front,
                     const Dataset& validation) {
  std::ostringstream out;
  out << "complexity,train_loss,validation_loss,expression\n";
  for (const auto& [complexity_level, cand] : front.entries()) {
    out << complexity_level << "," << number17(cand.train_loss) << ","
        << number17(expr_mse(cand.expr, validation)) << ",\"" << format(cand.expr) << "\"\n";
  }
  write_text_file(path, out.str());
}

void write_predictions_csv(const std::string& path, const Dataset& data,
                           const ParetoFront& front, const Candidate& selected) {
  std::ostringstream out;
  for (int j = 1; j <= data.n_vars; ++j) out << "x" << j << ",";
  out << "y,yhat_selected";
  for (const auto& [complexity_level, cand] : front.entries()) {
    out << ",yhat_c" << complexity_level;
  }
  out << "\n";
  const Eigen::VectorXd selected_pred = evaluate_all(selected.expr, data.X);
  std::vector<Eigen::VectorXd> front_preds;
  for (const auto& [complexity_level, cand] : front.entries()) {
    front_preds.push_back(evaluate_all(cand.expr, data.X));
  }
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.n_vars; ++j) out << number17(data.X(i, j)) << ",";
    out << number17(data.y[i]) << "," << number17(selected_pred[i]);
    for (const auto& pred : front_preds) out << "," << number17(pred[i]);
    out << "\n";
  }
  write_text_file(path, out.str());
}

std::uint64_t parse_u64(const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::runtime_error("expected an unsigned integer, got '" + text + "'");
  }
  return v;
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::runtime_error("expected a number, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& text) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::runtime_error("expected an integer, got '" + text + "'");
  }
  return v;
}

std::string trim(std::string_view s) {
  const auto from = s.find_first_not_of(" \t");
  if (from == std::string_view::npos) return {};
  const auto to = s.find_last_not_of(" \t");
  return std::string(s.substr(from, to - from + 1));
}

}  // namespace

SearchConfig load_config_file(const std::string& path, std::optional<int> data_n_vars) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  SearchConfig cfg;
  bool n_vars_set = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      if (key == "population_size") {
        cfg.population_size = parse_int(value);
      } else if (key == "generations") {
        cfg.generations = parse_int(value);
      } else if (key == "tournament_size") {
        cfg.tournament_size = parse_int(value);
      } else if (key == "max_complexity") {
        cfg.max_complexity = parse_int(value);
      } else if (key == "parsimony_coefficient") {
        cfg.parsimony_coefficient = parse_double(value);
      } else if (key == "mutation_weights.point") {
        cfg.mutation_weights.point = parse_double(value);
      } else if (key == "mutation_weights.subtree") {
        cfg.mutation_weights.subtree = parse_double(value);
      } else if (key == "mutation_weights.constant_jitter") {
        cfg.mutation_weights.constant_jitter = parse_double(value);
      } else if (key == "mutation_weights.hoist") {
        cfg.mutation_weights.hoist = parse_double(value);
      } else if (key == "crossover_probability") {
        cfg.crossover_probability = parse_double(value);
      } else if (key == "constant_opt_iters") {
        cfg.constant_opt_iters = parse_int(value);
      } else if (key == "rejection_retry_limit") {
        cfg.rejection_retry_limit = parse_int(value);
      } else if (key == "rng_seed") {
        cfg.rng_seed = parse_u64(value);
      } else if (key == "n_vars") {
        cfg.n_vars = parse_int(value);
        n_vars_set = true;
      } else {
        throw std::runtime_error("unknown key '" + key + "'");
      }
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (data_n_vars) {
    if (n_vars_set && cfg.n_vars != *data_n_vars) {
      throw std::runtime_error("config n_vars=" + std::to_string(cfg.n_vars) +
                               " does not match the dataset (" + std::to_string(*data_n_vars) +
                               " variables)");
    }
    cfg.n_vars = *data_n_vars;
  }
  return cfg;
}

bool dominates(double sr_loss, int sr_complexity, double quad_loss, int n_vars) {
  return sr_loss < quad_loss && sr_complexity < param_count(n_vars);
}

int cmd_analyze(const std::string& expr_text, int n_vars, std::ostream& out, std::ostream& err) {
  try {
    const Expr e = parse(expr_text, n_vars);
    const CurvatureReport report = analyze(e);
    out << explain(e);
    return report.verdict ? 0 : 2;
  } catch (const ParseError& pe) {
    err << "parse error at offset " << pe.offset() << ": " << pe.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_gen(const GenArgs& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.box.size() % 2 != 0) {
      throw std::runtime_error("--box expects a lo/hi pair per dimension");
    }
    const int box_dims = static_cast<int>(args.box.size() / 2);

    Expr truth;
    int n_vars = 0;
    if (const TruthSpec* spec = find_truth(args.truth)) {
      n_vars = spec->n_vars;
      truth = parse(spec->text, n_vars);
      if (box_dims != 0 && box_dims != n_vars) {
        throw std::runtime_error("truth '" + spec->name + "' has " + std::to_string(n_vars) +
                                 " variable(s) but --box gives " + std::to_string(box_dims));
      }
    } else {
      constexpr int kMaxVars = 16;
      try {
        truth = parse(args.truth, kMaxVars);
      } catch (const ParseError& pe) {
        const bool name_like = !args.truth.empty() &&
                               std::all_of(args.truth.begin(), args.truth.end(), [](char c) {
                                 return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
                               });
        if (name_like) {
          std::string names;
          for (const TruthSpec& t : builtin_truths()) {
            if (!names.empty()) names += ", ";
            names += t.name;
          }
          throw std::runtime_error("unknown truth name '" + args.truth + "'; available: " + names);
        }
        throw std::runtime_error("cannot parse truth expression at offset " +
                                 std::to_string(pe.offset()) + ": " + pe.what());
      }
      n_vars = std::max(min_var_count(truth), 1);
      if (box_dims != 0) {
        if (box_dims < n_vars) {
          throw std::runtime_error("truth uses " + std::to_string(n_vars) +
                                   " variable(s) but --box gives only " + std::to_string(box_dims));
        }
        n_vars = box_dims;
      }
    }

    Eigen::VectorXd lo(n_vars), hi(n_vars);
    for (int i = 0; i < n_vars; ++i) {
      if (box_dims != 0) {
        lo[i] = args.box[static_cast<std::size_t>(2 * i)];
        hi[i] = args.box[static_cast<std::size_t>(2 * i + 1)];
      } else {
        lo[i] = -1.0;
        hi[i] = 1.0;
      }
    }

    const Dataset d = generate(truth, Polytope::box(lo, hi), args.count, args.sigma, args.seed);
    save_csv(d, args.out_path);
    out << "wrote " << d.size() << " samples to " << args.out_path << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const int n_vars = csv_n_vars(args.data_path);
    SearchConfig cfg = args.config_path.empty() ? SearchConfig{}
                                                : load_config_file(args.config_path, n_vars);
    cfg.n_vars = n_vars;
    if (args.seed) cfg.rng_seed = *args.seed;
    const std::uint64_t split_seed = args.split_seed.value_or(cfg.rng_seed);

    const SplitData s = load_and_split(args.data_path, args.train_fraction, split_seed);

    const auto started = std::chrono::steady_clock::now();
    const ParetoFront front = run(cfg, s.train, args.threads);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    err << "search finished in " << std::fixed << std::setprecision(2) << elapsed.count()
        << " s\n";

    const Candidate selected = select_model(front);

    json report;
    report["command"] = "fit";
    report["config"] = config_json(cfg);
    report["data"] = data_json(s, args.train_fraction);
    report["front"] = front_json(front, s.validation);
    report["selected"] = entry_json(selected, expr_mse(selected.expr, s.validation));
    write_text_file(args.out_path, report.dump(2) + "\n");

    print_front_table(front, s.validation, out);
    out << "selected: " << format(selected.expr) << " (complexity " << selected.complexity
        << ", train loss " << std::scientific << std::setprecision(4) << selected.train_loss
        << ")\n";

    if (!args.front_csv_path.empty()) write_front_csv(args.front_csv_path, front, s.validation);
    if (!args.predictions_path.empty()) {
      write_predictions_csv(args.predictions_path, s.full, front, selected);
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_baseline(const BaselineArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Dataset d = load_csv(args.data_path, csv_n_vars(args.data_path));
    const QuadFitReport report = fit_quadratic(d);

    json j;
    j["command"] = "baseline";
    j["baseline"] = quad_json(report);
    write_text_file(args.out_path, j.dump(2) + "\n");

    out << "quadratic baseline: mse " << std::scientific << std::setprecision(4)
        << report.train_mse << ", " << param_count(d.n_vars) << " parameters, projection "
        << (report.projection_applied ? "applied" : "not needed") << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const int n_vars = csv_n_vars(args.data_path);
    SearchConfig cfg = args.config_path.empty() ? SearchConfig{}
                                                : load_config_file(args.config_path, n_vars);
    cfg.n_vars = n_vars;
    if (args.seed) cfg.rng_seed = *args.seed;
    const std::uint64_t split_seed = args.split_seed.value_or(cfg.rng_seed);

    const SplitData s = load_and_split(args.data_path, args.train_fraction, split_seed);

    const auto started = std::chrono::steady_clock::now();
    const ParetoFront front = run(cfg, s.train, args.threads);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    err << "search finished in " << std::fixed << std::setprecision(2) << elapsed.count()
        << " s\n";

    const Candidate selected = select_model(front);
    const double sr_validation = expr_mse(selected.expr, s.validation);

    const QuadFitReport quad = fit_quadratic(s.train);
    const double quad_validation = mse(quad.model, s.validation);

    const bool sr_wins = dominates(sr_validation, selected.complexity, quad_validation, n_vars);

    json report;
    report["command"] = "compare";
    report["config"] = config_json(cfg);
    report["data"] = data_json(s, args.train_fraction);
    report["front"] = front_json(front, s.validation);
    report["selected"] = entry_json(selected, sr_validation);
    report["baseline"] = quad_json(quad);
    report["baseline"]["validation_mse"] = quad_validation;
    report["comparison"] = {{"sr_validation_mse", sr_validation},
                            {"sr_complexity", selected.complexity},
                            {"quad_validation_mse", quad_validation},
                            {"quad_param_count", param_count(n_vars)},
                            {"dominates", sr_wins}};
    write_text_file(args.out_path, report.dump(2) + "\n");

    print_front_table(front, s.validation, out);
    out << "selected SR model:   mse " << std::scientific << std::setprecision(4) << sr_validation
        << " at complexity " << selected.complexity << "\n";
    out << "quadratic baseline:  mse " << std::scientific << std::setprecision(4)
        << quad_validation << " with " << param_count(n_vars) << " parameters\n";
    out << "symbolic model dominates: " << (sr_wins ? "yes" : "no") << "\n";

    if (n_vars == 1 && args.grid > 0) {
      std::string plot_path = args.plot_path;
      if (plot_path.empty()) {
        std::filesystem::path p(args.out_path);
        p.replace_extension();
        plot_path = p.string() + "_plot.csv";
      }
      const Candidate& low = front.entries().begin()->second;
      Expr truth;
      if (s.full.meta && !s.full.meta->truth_text.empty()) {
        try {
          truth = parse(s.full.meta->truth_text, n_vars);
        } catch (const ParseError&) {
          // stale or foreign metadata; omit the truth column
        }
      }
      const Eigen::VectorXd grid_x = Eigen::VectorXd::LinSpaced(
          args.grid, s.full.X.col(0).minCoeff(), s.full.X.col(0).maxCoeff());
      std::ostringstream plot;
      plot << "x" << (truth.valid() ? ",y_truth" : "") << ",y_quad,y_sr_low,y_sr_selected\n";
      Eigen::VectorXd point(1);
      for (Eigen::Index i = 0; i < grid_x.size(); ++i) {
        point[0] = grid_x[i];
        plot << number17(grid_x[i]);
        if (truth.valid()) plot << "," << number17(evaluate(truth, point));
        plot << "," << number17(predict(quad.model, point));
        plot << "," << number17(evaluate(low.expr, point));
        plot << "," << number17(evaluate(selected.expr, point));
        plot << "\n";
      }
      write_text_file(plot_path, plot.str());
      out << "plot grid written to " << plot_path << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dcpsr::cli
