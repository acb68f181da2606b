/*
 * Copyright 2026 The mrmult Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// mrmult command-line front end.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mrmult/bench.hpp"
#include "mrmult/matmul.hpp"
#include "mrmult/matrix.hpp"
#include "mrmult/nmf.hpp"
#include "mrmult/pagerank.hpp"
#include "mrmult/svm.hpp"

namespace fs = std::filesystem;
using namespace mrmult;

namespace {

// Exit status when results were written but a runtime invariant check failed.
constexpr int kInvariantFailure = 2;

struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& path) {
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_history(const std::string& path, const std::vector<double>& values, std::size_t first = 0) {
  auto out = open_out(path);
  out << "iter,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) out << first + i << ',' << format_real(values[i]) << '\n';
}

void write_matrix_file(const SparseMatrix& m, const std::string& path) {
  auto out = open_out(path);
  write_matrix(m, out);
}

void write_vector(const std::string& path, const DenseVector& v) {
  auto out = open_out(path);
  for (const double x : v) out << format_real(x) << '\n';
}

DenseVector read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  DenseVector v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      v.push_back(parse_real(line));
    } catch (const std::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return v;
}

double real_flag(const std::string& text, const char* name) {
  try {
    return parse_real(text);
  } catch (const std::exception&) {
    throw CLI::ValidationError(std::string("--") + name, "expected a number, got `" + text + "`");
  }
}

// --config FILE: `key=value` lines supply `--key value` for flags that are
// not already on the command line. A value may list several items separated
// by spaces or commas.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> out;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (path.empty()) return out;

  std::set<std::string> given;
  for (const auto& a : out)
    if (a.starts_with("--")) given.insert(a.substr(2, a.find('=') - 2));

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, lineno, "expected key=value");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(path, lineno, "empty key");
    if (given.contains(key)) continue;
    out.push_back("--" + key);
    std::replace(value.begin(), value.end(), ',', ' ');
    std::istringstream items(value);
    std::string item;
    while (items >> item) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct Common {
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help, bool with_workers = true) {
  if (with_workers) cmd->add_option("--workers", c.workers, "logical workers")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--out", c.out, out_help)->required();
}

struct GenerateArgs {
  Common c;
  std::size_t m = 0, n = 0;
  std::string delta = "2^-7";
};

int cmd_generate(const GenerateArgs& a) {
  const auto g = generate_random({a.m, a.n, real_flag(a.delta, "delta"), a.c.seed}, a.c.workers);
  write_matrix_file(g, a.c.out);
  std::cout << "wrote " << a.c.out << " (" << g.rows() << "x" << g.cols() << ", nnz " << g.nnz() << ")\n";
  return 0;
}

struct MultiplyArgs {
  Common c;
  std::string a, b, schema = "auto", shard = "naive", metrics;
};

int cmd_multiply(const MultiplyArgs& args) {
  const auto a = read_matrix(args.a);
  const auto b = read_matrix(args.b);
  if (a.cols() != b.rows()) {
    throw ShapeError("cannot multiply " + args.a + " (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + ") by " + args.b + " (" + std::to_string(b.rows()) +
                     "x" + std::to_string(b.cols()) + ")");
  }
  const auto schema = args.schema == "auto"
                          ? suggest_schema(a.rows(), a.cols(), b.cols(), a.nnz(), b.nnz(), args.c.workers)
                          : parse_schema(args.schema);
  const auto shard = parse_shard_kind(args.shard);
  const auto res = partition_multiply(a, b, schema, shard, args.c.workers);

  write_matrix_file(res.product, args.c.out);
  const auto metrics_path = args.metrics.empty() ? args.c.out + ".metrics.csv" : args.metrics;
  auto m = open_out(metrics_path);
  m << multiply_csv_header() << '\n';
  for (const auto& jm : res.metrics) m << multiply_csv_row(jm, schema, shard) << '\n';
  std::cout << "wrote " << args.c.out << " and " << metrics_path << " (schema " << to_string(schema)
            << ", scalar_ops " << res.scalar_ops() << ")\n";
  return 0;
}

struct NmfArgs {
  Common c;
  std::string a, shard = "naive";
  std::size_t k = 8, iters = 50, inner = 1, outer = 1;
  double eps = 1e-12;
};

int cmd_nmf(const NmfArgs& args) {
  const auto a = read_matrix(args.a);
  NmfOptions opt;
  opt.inner_parts = args.inner;
  opt.outer_parts = args.outer;
  opt.shard = parse_shard_kind(args.shard);
  opt.eps = args.eps;

  auto s = nmf_init(a, args.k, args.c.seed, args.c.workers);
  std::string violation;
  for (std::size_t it = 0; it < args.iters; ++it) {
    s = nmf_step(a, std::move(s), opt, args.c.workers);
    const auto& h = s.divergence_history;
    if (violation.empty() && h[h.size() - 1] > h[h.size() - 2] + 1e-9) {
      violation = "divergence increased at iteration " + std::to_string(it + 1);
    }
  }

  const auto& p = args.c.out;
  write_matrix_file(s.w, p + "_W.txt");
  write_matrix_file(s.h, p + "_H.txt");
  write_history(p + "_divergence.csv", s.divergence_history);
  {
    auto t = open_out(p + "_timings.csv");
    t << "component,ms\n";
    t.setf(std::ios::fixed);
    t.precision(3);
    const auto& tm = s.timings;
    t << "X=W^T A," << tm.h_numerator << "\nY=W^T W H," << tm.h_denominator << "\nH=H.*X./Y,"
      << tm.h_update << "\nA H^T," << tm.w_numerator << "\nW H H^T," << tm.w_denominator
      << "\nW=W.*(A H^T)./(W H H^T)," << tm.w_update << '\n';
  }
  std::cout << "final divergence " << format_real(s.divergence_history.back()) << '\n';
  if (!violation.empty()) throw InvariantViolation(violation);
  return 0;
}

struct SvmTrainArgs {
  Common c;
  std::string data;
  std::size_t features = 0, iters = 1000;
  double cbox = 1.0, eta = 0.001;
};

int cmd_svm_train(const SvmTrainArgs& args) {
  const auto ds = read_svm_dataset(args.data, args.features);
  const SvmProblem prob{ds.x, ds.y, args.cbox, args.eta};
  std::string violation;
  const auto s = svm_train(prob, args.iters, args.c.workers, [&](std::size_t it, const DenseVector& alpha) {
    if (!violation.empty()) return;
    for (const double a : alpha)
      if (!(a >= 0.0 && a <= prob.c)) violation = "alpha left [0, C] at iteration " + std::to_string(it);
  });
  const double acc = svm_accuracy(svm_predict(s, prob, prob.t, args.c.workers), prob.y);

  write_vector(args.c.out + "_alpha.txt", s.alpha);
  write_history(args.c.out + "_objective.csv", s.objective_history);
  std::cout << "training_accuracy " << format_real(acc) << '\n';
  if (!violation.empty()) throw InvariantViolation(violation);
  return 0;
}

struct SvmPredictArgs {
  Common c;
  std::string train, alpha, query;
  std::size_t features = 0;
  double cbox = 1.0;
};

int cmd_svm_predict(const SvmPredictArgs& args) {
  const auto train = read_svm_dataset(args.train, args.features);
  const auto query = read_svm_dataset(args.query, train.x.cols());
  const SvmProblem prob{train.x, train.y, args.cbox, 1.0};
  SvmState s{read_vector(args.alpha), SparseMatrix(1, 1), {}};
  if (s.alpha.size() != train.x.rows()) {
    throw ShapeError(args.alpha + " has " + std::to_string(s.alpha.size()) + " values but " + args.train +
                     " has " + std::to_string(train.x.rows()) + " examples");
  }
  if (query.x.cols() != train.x.cols()) {
    throw ShapeError(args.query + " has " + std::to_string(query.x.cols()) + " features but " + args.train +
                     " has " + std::to_string(train.x.cols()));
  }
  const auto scores = svm_predict(s, prob, query.x, args.c.workers);

  // Query labels use the training file's label values when they match them.
  DenseVector labels(query.y.size());
  bool mapped = true;
  {
    std::ifstream in(args.query);
    std::string line;
    std::size_t i = 0;
    while (std::getline(in, line) && i < labels.size()) {
      std::istringstream ss(line);
      std::string tok;
      if (!(ss >> tok) || tok[0] == '#') continue;
      const double v = parse_real(tok.front() == '+' ? tok.substr(1) : tok);
      if (v == train.positive_label) labels[i] = 1.0;
      else if (v == train.negative_label) labels[i] = -1.0;
      else mapped = false;
      ++i;
    }
  }
  if (!mapped) labels = query.y;

  auto out = open_out(args.c.out);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out << format_real(scores[i]) << ',' << (scores[i] > 0 ? 1 : -1) << '\n';
  }
  std::cout << "accuracy " << format_real(svm_accuracy(scores, labels)) << '\n';
  return 0;
}

struct PagerankArgs {
  Common c;
  std::string edges;
  std::size_t nodes = 0, iters = 100;
  double d = 0.85, tol = 1e-8;
};

int cmd_pagerank(const PagerankArgs& args) {
  const auto edges = read_edge_list(args.edges);
  std::size_t n = args.nodes;
  if (n == 0)
    for (const auto& e : edges) n = std::max({n, e.src + 1, e.dst + 1});
  const auto prob = pagerank_build(edges, args.d, n);
  const auto r = pagerank(prob, args.tol, args.iters, args.c.workers);

  {
    auto out = open_out(args.c.out + "_pi.csv");
    for (std::size_t i = 0; i < r.pi.size(); ++i) out << i << ',' << format_real(r.pi[i]) << '\n';
  }
  {
    auto out = open_out(args.c.out + "_ranks.csv");
    for (const auto& [id, v] : sorted_ranks(r.pi)) out << id << ',' << format_real(v) << '\n';
  }
  write_history(args.c.out + "_residual.csv", r.residual_history, 1);
  std::cout << "iterations " << r.iterations << (r.converged ? " (converged)" : " (max_iters reached)") << '\n';

  for (std::size_t t = 0; t < r.mass_history.size(); ++t) {
    if (std::abs(r.mass_history[t] - 1.0) > 1e-10) {
      throw InvariantViolation("rank mass " + format_real(r.mass_history[t]) + " at iteration " +
                               std::to_string(t));
    }
  }
  return 0;
}

struct BenchArgs {
  std::vector<std::string> sizes{"2^8", "2^9", "2^10", "2^11", "2^12"};
  std::vector<std::string> deltas{"2^-7"};
  std::vector<std::string> schemas{"4x2x4"};
  std::vector<std::string> shards{"naive"};
  std::vector<std::size_t> workers{1};
  std::uint64_t seed = 1;
  std::size_t repeats = 1;
  std::string out;
};

int cmd_bench(const BenchArgs& args) {
  BenchConfig cfg;
  cfg.sizes.clear();
  for (const auto& s : args.sizes) {
    const double v = real_flag(s, "sizes");
    if (!(v >= 1.0) || v != std::floor(v)) throw CLI::ValidationError("--sizes", "not a positive integer: " + s);
    cfg.sizes.push_back(static_cast<std::size_t>(v));
  }
  cfg.deltas.clear();
  for (const auto& d : args.deltas) cfg.deltas.push_back(real_flag(d, "deltas"));
  cfg.schemas.clear();
  for (const auto& s : args.schemas) cfg.schemas.push_back(parse_schema(s));
  cfg.shards.clear();
  for (const auto& s : args.shards) cfg.shards.push_back(parse_shard_kind(s));
  cfg.workers = args.workers;
  cfg.seed = args.seed;
  cfg.repeats = args.repeats;
  validate(cfg);

  fs::create_directories(args.out);
  auto runs = open_out((fs::path(args.out) / "runs.csv").string());
  runs << bench_csv_header() << '\n';
  std::size_t failed = 0;
  const auto rows = run_bench(cfg, [&](const BenchRow& r) {
    runs << bench_csv_row(r) << '\n' << std::flush;
    if (!r.error.empty()) {
      ++failed;
      std::cerr << "cell m=" << r.m << " delta=" << format_real(r.delta) << " schema=" << to_string(r.schema)
                << " failed: " << r.error << '\n';
    }
  });
  auto summary = open_out((fs::path(args.out) / "summary.csv").string());
  summary << summary_csv_header() << '\n';
  for (const auto& s : summarize(rows)) {
    summary << summary_csv_row(s) << '\n';
    std::cout << s.metric << ' ' << s.group << ' ' << format_real(s.value) << '\n';
  }
  std::cout << rows.size() << " cells, " << failed << " failed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix multiplication models on a local map/reduce engine"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a random sparse matrix");
  add_common(g, gen.c, "output matrix file");
  g->add_option("--m", gen.m, "rows")->required()->check(CLI::PositiveNumber);
  g->add_option("--n", gen.n, "columns")->required()->check(CLI::PositiveNumber);
  g->add_option("--delta", gen.delta, "nonzero fraction, decimal or 2^-7 notation")->capture_default_str();

  MultiplyArgs mul;
  auto* mu = app.add_subcommand("multiply", "partition-summation product of two matrix files");
  add_common(mu, mul.c, "output matrix file");
  mu->add_option("--a", mul.a, "left matrix file")->required();
  mu->add_option("--b", mul.b, "right matrix file")->required();
  mu->add_option("--schema", mul.schema, "MxNxK or auto")->capture_default_str();
  mu->add_option("--shard", mul.shard, "naive or rand")->capture_default_str();
  mu->add_option("--metrics", mul.metrics, "metrics CSV (default: <out>.metrics.csv)");

  NmfArgs nmf;
  auto* nm = app.add_subcommand("nmf", "Gaussian NMF by multiplicative updates");
  add_common(nm, nmf.c, "output prefix");
  nm->add_option("--a", nmf.a, "input matrix file")->required();
  nm->add_option("--k", nmf.k, "rank")->capture_default_str();
  nm->add_option("--iters", nmf.iters, "iterations")->capture_default_str();
  nm->add_option("--inner-parts", nmf.inner, "inner splits")->capture_default_str();
  nm->add_option("--outer-parts", nmf.outer, "outer splits")->capture_default_str();
  nm->add_option("--shard", nmf.shard, "naive or rand")->capture_default_str();
  nm->add_option("--eps", nmf.eps, "denominator guard")->capture_default_str();

  SvmTrainArgs st;
  auto* tr = app.add_subcommand("svm-train", "train a fixed-bias linear SVM");
  add_common(tr, st.c, "output prefix");
  tr->add_option("--data", st.data, "training file")->required();
  tr->add_option("--features", st.features, "minimum feature count");
  tr->add_option("--iters", st.iters, "iterations")->capture_default_str();
  tr->add_option("--c", st.cbox, "box bound C")->capture_default_str();
  tr->add_option("--eta", st.eta, "step size")->capture_default_str();

  SvmPredictArgs sp;
  auto* pr = app.add_subcommand("svm-predict", "score query rows with a trained alpha");
  add_common(pr, sp.c, "output scores file");
  pr->add_option("--train", sp.train, "training file")->required();
  pr->add_option("--alpha", sp.alpha, "alpha file from svm-train")->required();
  pr->add_option("--query", sp.query, "query file")->required();
  pr->add_option("--features", sp.features, "minimum feature count");
  pr->add_option("--c", sp.cbox, "box bound C")->capture_default_str();

  PagerankArgs pg;
  auto* pa = app.add_subcommand("pagerank", "damped power iteration over an edge list");
  add_common(pa, pg.c, "output prefix");
  pa->add_option("--edges", pg.edges, "edge-list file")->required();
  pa->add_option("--nodes", pg.nodes, "node count (default: largest id + 1)");
  pa->add_option("--d", pg.d, "damping factor")->capture_default_str();
  pa->add_option("--tol", pg.tol, "L1 convergence tolerance")->capture_default_str();
  pa->add_option("--iters", pg.iters, "maximum iterations")->capture_default_str();

  BenchArgs bench;
  auto* be = app.add_subcommand("bench-scaling", "run the multiply scaling grid");
  be->add_option("--sizes", bench.sizes, "matrix sizes")->delimiter(',')->capture_default_str();
  be->add_option("--deltas", bench.deltas, "nonzero fractions")->delimiter(',')->capture_default_str();
  be->add_option("--schemas", bench.schemas, "partition schemas")->delimiter(',')->capture_default_str();
  be->add_option("--shards", bench.shards, "shard functions")->delimiter(',')->capture_default_str();
  be->add_option("--workers", bench.workers, "worker counts")->delimiter(',')->capture_default_str();
  be->add_option("--seed", bench.seed, "random seed")->capture_default_str();
  be->add_option("--repeats", bench.repeats, "runs per cell")->capture_default_str();
  be->add_option("--out", bench.out, "output directory")->required();

  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--config", "key=value file supplying flags not given on the command line");
  }

  int status = 0;
  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (*g) status = cmd_generate(gen);
    else if (*mu) status = cmd_multiply(mul);
    else if (*nm) status = cmd_nmf(nmf);
    else if (*tr) status = cmd_svm_train(st);
    else if (*pr) status = cmd_svm_predict(sp);
    else if (*pa) status = cmd_pagerank(pg);
    else if (*be) status = cmd_bench(bench);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const InvariantViolation& e) {
    std::cerr << "mrmult: invariant violated: " << e.what() << '\n';
    return kInvariantFailure;
  } catch (const std::exception& e) {
    std::cerr << "mrmult: error: " << e.what() << '\n';
    return 1;
  }
  return status;
}
