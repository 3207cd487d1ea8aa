#include "dcpsr/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dcpsr/curvature.hpp"
#include "dcpsr/parse.hpp"
#include "dcpsr/rng.hpp"

namespace dcpsr {

namespace {

constexpr int kMaxConsecutiveRejects = 1'000'000;

std::string number17(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

[[noreturn]] void csv_error(const std::string& path, int line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

double parse_cell(const std::string& path, int line, std::string_view cell) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    csv_error(path, line, "non-numeric cell '" + std::string(cell) + "'");
  }
  if (!std::isfinite(v)) {
    csv_error(path, line, "non-finite cell '" + std::string(cell) + "'");
  }
  return v;
}

std::vector<std::string_view> split_cells(std::string_view row) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = row.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(row.substr(start));
      return cells;
    }
    cells.push_back(row.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string expected_header(int n_vars) {
  std::string h;
  for (int i = 1; i <= n_vars; ++i) {
    h += "x" + std::to_string(i) + ",";
  }
  h += "y";
  return h;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Polytope Polytope::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  Polytope p;
  p.lo = std::move(lo);
  p.hi = std::move(hi);
  p.A_dom.resize(0, p.lo.size());
  p.b_dom.resize(0);
  p.validate();
  return p;
}

void Polytope::validate() const {
  if (lo.size() == 0 || lo.size() != hi.size()) {
    throw std::invalid_argument("polytope box must have matching nonempty bounds");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) {
      throw std::invalid_argument("polytope box is degenerate: lo must be < hi per dimension");
    }
  }
  if (A_dom.rows() != b_dom.size() || (A_dom.rows() > 0 && A_dom.cols() != lo.size())) {
    throw std::invalid_argument("polytope constraint dimensions do not match");
  }
}

Eigen::MatrixXd sample_polytope(const Polytope& p, int count, std::mt19937_64& rng) {
  p.validate();
  if (count < 1) throw std::invalid_argument("sample count must be >= 1");
  const int n = p.n_vars();
  Eigen::MatrixXd out(count, n);
  Eigen::VectorXd x(n);
  int accepted = 0;
  int consecutive_rejects = 0;
  while (accepted < count) {
    for (int j = 0; j < n; ++j) {
      x[j] = uniform_real(rng, p.lo[j], p.hi[j]);
    }
    const bool feasible = p.A_dom.rows() == 0 || ((p.A_dom * x).array() <= p.b_dom.array()).all();
    if (feasible) {
      out.row(accepted++) = x;
      consecutive_rejects = 0;
    } else if (++consecutive_rejects >= kMaxConsecutiveRejects) {
      throw std::runtime_error("empty or thin polytope: rejected 1000000 consecutive proposals");
    }
  }
  return out;
}

Dataset generate(const Expr& truth, const Polytope& p, int count, double sigma,
                 std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
  if (!is_dcp_convex(truth)) {
    throw std::invalid_argument("ground truth must be DCP-convex: " + format(truth));
  }
  if (min_var_count(truth) > p.n_vars()) {
    throw std::invalid_argument("ground truth references more variables than the domain has");
  }
  std::mt19937_64 rng(seed);
  Dataset d;
  d.X = sample_polytope(p, count, rng);
  // scalar evaluation on purpose: noiseless outputs must equal evaluate()
  // bit-for-bit (the vectorized path may round exp differently)
  d.y.resize(count);
  for (Eigen::Index i = 0; i < d.y.size(); ++i) {
    d.y[i] = evaluate(truth, Eigen::VectorXd(d.X.row(i).transpose()));
  }
  if (sigma > 0.0) {
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
      d.y[i] += sigma * standard_normal(rng);
    }
  }
  if (!d.y.allFinite()) {
    throw std::runtime_error("ground truth overflows on the sampled domain");
  }
  d.n_vars = p.n_vars();
  d.meta = DatasetMeta{format(truth), sigma, seed};
  return d;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must be in (0, 1)");
  }
  const Eigen::Index n = data.size();
  const Eigen::Index n_train =
      static_cast<Eigen::Index>(std::ceil(train_fraction * static_cast<double>(n)));
  if (n_train <= 0 || n_train >= n) {
    throw std::invalid_argument("degenerate split: both parts must be non-empty");
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  auto take = [&](Eigen::Index from, Eigen::Index count) {
    Dataset part;
    part.X.resize(count, data.X.cols());
    part.y.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      part.X.row(i) = data.X.row(idx[static_cast<std::size_t>(from + i)]);
      part.y[i] = data.y[idx[static_cast<std::size_t>(from + i)]];
    }
    part.n_vars = data.n_vars;
    part.meta = data.meta;
    return part;
  };
  return {take(0, n_train), take(n_train, n - n_train)};
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (data.meta) {
    if (!data.meta->truth_text.empty()) {
      out << "# truth: " << data.meta->truth_text << "\n";
    }
    out << "# sigma: " << number17(data.meta->noise_sigma) << "\n";
    out << "# seed: " << data.meta->seed << "\n";
  }
  out << expected_header(data.n_vars) << "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.n_vars; ++j) {
      out << number17(data.X(i, j)) << ",";
    }
    out << number17(data.y[i]) << "\n";
  }
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

Dataset load_csv(const std::string& path, int n_vars) {
  if (n_vars < 1) throw std::invalid_argument("load_csv: n_vars must be >= 1");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  Dataset d;
  d.n_vars = n_vars;
  DatasetMeta meta;
  bool have_meta = false;

  std::string line;
  int line_no = 0;
  bool header_seen = false;
  Eigen::Index rows = 0;
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> ys;

  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto parse_meta = [&](const char* key) -> std::optional<std::string> {
        const std::string prefix = std::string("# ") + key + ": ";
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
        return std::nullopt;
      };
      if (auto v = parse_meta("truth")) {
        meta.truth_text = *v;
        have_meta = true;
      } else if (auto v = parse_meta("sigma")) {
        meta.noise_sigma = parse_cell(path, line_no, *v);
        have_meta = true;
      } else if (auto v = parse_meta("seed")) {
        std::uint64_t seed = 0;
        const auto res = std::from_chars(v->data(), v->data() + v->size(), seed);
        if (res.ec != std::errc{} || res.ptr != v->data() + v->size()) {
          csv_error(path, line_no, "malformed seed comment");
        }
        meta.seed = seed;
        have_meta = true;
      }
      continue;  // unrecognized comments are ignored
    }
    if (!header_seen) {
      if (line != expected_header(n_vars)) {
        csv_error(path, line_no,
                  "unexpected header '" + line + "' (expected '" + expected_header(n_vars) + "')");
      }
      header_seen = true;
      continue;
    }
    const auto cells = split_cells(line);
    if (static_cast<int>(cells.size()) != n_vars + 1) {
      csv_error(path, line_no,
                "expected " + std::to_string(n_vars + 1) + " columns, found " +
                    std::to_string(cells.size()));
    }
    Eigen::VectorXd x(n_vars);
    for (int j = 0; j < n_vars; ++j) {
      x[j] = parse_cell(path, line_no, cells[static_cast<std::size_t>(j)]);
    }
    xs.push_back(std::move(x));
    ys.push_back(parse_cell(path, line_no, cells.back()));
    ++rows;
  }
  if (!header_seen) csv_error(path, line_no, "missing header row");
  if (rows == 0) csv_error(path, line_no, "no data rows");

  d.X.resize(rows, n_vars);
  d.y.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    d.X.row(i) = xs[static_cast<std::size_t>(i)];
    d.y[i] = ys[static_cast<std::size_t>(i)];
  }
  if (have_meta) d.meta = meta;
  return d;
}

int csv_n_vars(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_cells(line);
    if (cells.size() < 2 || cells.back() != "y") {
      csv_error(path, line_no, "header must end with column 'y'");
    }
    for (std::size_t j = 0; j + 1 < cells.size(); ++j) {
      if (cells[j] != "x" + std::to_string(j + 1)) {
        csv_error(path, line_no, "header column " + std::to_string(j + 1) + " must be 'x" +
                                     std::to_string(j + 1) + "'");
      }
    }
    return static_cast<int>(cells.size()) - 1;
  }
  throw std::runtime_error(path + ": missing header row");
}

const std::vector<TruthSpec>& builtin_truths() {
  static const std::vector<TruthSpec> kTruths = [] {
    std::vector<TruthSpec> t{
        {"fig1", "exp(x1 + max(x1, -5*x1) + sq(x1)) + 4*x1", 1},
        {"expsum", "exp(3.2*x1) + exp(-4.9*x1)", 1},
        {"absline", "abs(x1) + 0.5*x1", 1},
        {"maxquad2d", "max(sq(x1), sq(x2)) + abs(x1 + -1*x2)", 2},
    };
    for (const TruthSpec& spec : t) {
      if (!is_dcp_convex(parse(spec.text, spec.n_vars))) {
        throw std::logic_error("builtin truth '" + spec.name + "' is not DCP-convex");
      }
    }
    return t;
  }();
  return kTruths;
}

const TruthSpec* find_truth(const std::string& name) {
  for (const TruthSpec& spec : builtin_truths()) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

}  // namespace dcpsr
