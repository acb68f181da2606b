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

#include "mrmult/svm.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace mrmult {

namespace {

void check_problem(const SvmProblem& prob) {
  if (prob.y.size() != prob.t.rows()) {
    throw ShapeError("svm: " + std::to_string(prob.y.size()) + " labels for " +
                     std::to_string(prob.t.rows()) + " examples");
  }
  for (const double v : prob.y)
    if (v != 1.0 && v != -1.0) throw std::invalid_argument("svm: labels must be -1 or +1");
  if (!(prob.c >= 0.0)) throw std::invalid_argument("svm: C must be >= 0");
  if (!(prob.eta > 0.0)) throw std::invalid_argument("svm: eta must be > 0");
}

DenseMatrix as_column(const DenseVector& v) { return DenseMatrix(v.size(), 1, v); }

DenseVector column_values(const SparseMatrix& col, std::size_t len) {
  DenseVector out(len, 0.0);
  for (std::size_t i = 0; i < col.rows(); ++i) {
    const auto r = col.row(i);
    if (!r.empty()) out[i] = r.values[0];
  }
  return out;
}

DenseVector signed_alpha(const DenseVector& alpha, const DenseVector& y) {
  DenseVector d(alpha.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = y[i] * alpha[i];
  return d;
}

DenseVector gradient_from(const DenseVector& kd, const DenseVector& y, double eta) {
  DenseVector g(kd.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = eta * (1.0 - y[i] * kd[i]);
  return g;
}

// Inner splits fix the summation order of every kernel entry, so they are
// chosen as for a single worker; only the output blocking follows `workers`.
PartitionSchema stable_schema(std::size_t rows_a, std::size_t cols_a, std::size_t cols_b,
                              std::size_t nnz_a, std::size_t nnz_b, std::size_t workers) {
  auto s = suggest_schema(rows_a, cols_a, cols_b, nnz_a, nnz_b, workers);
  s.n = suggest_schema(rows_a, cols_a, cols_b, nnz_a, nnz_b, 1).n;
  return s;
}

PartitionSchema kernel_schema(const SparseMatrix& t, std::size_t workers) {
  return stable_schema(t.rows(), t.cols(), t.rows(), t.nnz(), t.nnz(), workers);
}

}  // namespace

SparseMatrix svm_build_kernel(const SparseMatrix& t, const PartitionSchema& schema,
                              std::size_t workers, ShardKind shard) {
  return partition_multiply(t, transpose(t), schema, shard, workers).product;
}

double svm_objective(const DenseVector& alpha, const DenseVector& y, const SparseMatrix& k) {
  if (alpha.size() != k.rows() || y.size() != k.rows() || k.rows() != k.cols()) {
    throw ShapeError("svm_objective: shapes do not match");
  }
  const DenseVector d = signed_alpha(alpha, y);
  double linear = 0.0;
  for (const double a : alpha) linear += a;
  double quad = 0.0;
  for (std::size_t i = 0; i < k.rows(); ++i) {
    const auto r = k.row(i);
    double s = 0.0;
    for (std::size_t p = 0; p < r.size(); ++p) s += r.values[p] * d[r.cols[p]];
    quad += d[i] * s;
  }
  return linear - 0.5 * quad;
}

DenseVector svm_gradient(const SvmState& state, const SvmProblem& prob, std::size_t workers) {
  check_problem(prob);
  if (state.alpha.size() != prob.t.rows() || state.k.rows() != prob.t.rows() ||
      state.k.cols() != prob.t.rows()) {
    throw ShapeError("svm_gradient: state does not match the problem size");
  }
  const auto kd = broadcast_multiply(state.k, as_column(signed_alpha(state.alpha, prob.y)), workers);
  return gradient_from(column_values(kd, prob.y.size()), prob.y, prob.eta);
}

SvmState svm_train(const SvmProblem& prob, std::size_t iters, std::size_t workers,
                   const SvmObserver& observer) {
  check_problem(prob);
  const std::size_t l = prob.t.rows();

  SvmState state{DenseVector(l, 0.0), svm_build_kernel(prob.t, kernel_schema(prob.t, workers), workers), {}};
  state.objective_history.push_back(svm_objective(state.alpha, prob.y, state.k));

  RowwiseOperand kernel_rows(state.k, workers);
  for (std::size_t it = 0; it < iters; ++it) {
    const auto kd = kernel_rows.multiply(as_column(signed_alpha(state.alpha, prob.y)));
    const auto g = gradient_from(column_values(kd, l), prob.y, prob.eta);
    for (std::size_t i = 0; i < l; ++i) state.alpha[i] = std::clamp(state.alpha[i] + g[i], 0.0, prob.c);
    state.objective_history.push_back(svm_objective(state.alpha, prob.y, state.k));
    if (observer) observer(it + 1, state.alpha);
  }
  return state;
}

DenseVector svm_predict(const SvmState& state, const SvmProblem& prob, const SparseMatrix& q,
                        std::size_t workers) {
  check_problem(prob);
  if (q.cols() != prob.t.cols()) {
    throw ShapeError("svm_predict: queries have " + std::to_string(q.cols()) +
                     " features, training data " + std::to_string(prob.t.cols()));
  }
  if (state.alpha.size() != prob.t.rows()) throw ShapeError("svm_predict: alpha length mismatch");

  const SparseMatrix tt = transpose(prob.t);
  const auto schema = stable_schema(q.rows(), q.cols(), tt.cols(), q.nnz(), tt.nnz(), workers);
  const SparseMatrix kq = partition_multiply(q, tt, schema, ShardKind::naive, workers).product;
  const auto scores = broadcast_multiply(kq, as_column(signed_alpha(state.alpha, prob.y)), workers);
  return column_values(scores, q.rows());
}

double svm_accuracy(const DenseVector& scores, const DenseVector& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw ShapeError("svm_accuracy: score and label counts differ");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] * labels[i] > 0.0) ++hits;
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

SvmDataset read_svm_dataset(std::istream& in, const std::string& source, std::size_t features) {
  struct Example {
    double label;
    std::vector<Index> cols;
    std::vector<double> vals;
  };
  std::vector<Example> examples;
  std::set<double> labels;
  std::size_t width = features;

  auto parse = [&](std::string_view tok, auto& out, std::size_t lineno) {
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(source, lineno, "bad number `" + std::string(tok) + "`");
    }
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok) || tok[0] == '#') continue;
    Example ex{};
    if (tok.front() == '+') tok.erase(0, 1);
    parse(tok, ex.label, lineno);
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError(source, lineno, "expected index:value");
      std::size_t c = 0;
      double v = 0;
      parse(std::string_view(tok).substr(0, colon), c, lineno);
      parse(std::string_view(tok).substr(colon + 1), v, lineno);
      if (!ex.cols.empty() && c <= ex.cols.back()) {
        throw ParseError(source, lineno, "feature indices must be strictly ascending");
      }
      ex.cols.push_back(static_cast<Index>(c));
      ex.vals.push_back(v);
      width = std::max(width, c + 1);
    }
    labels.insert(ex.label);
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) throw ParseError(source, lineno, "no examples");
  // A single label is accepted only when it is already -1 or +1 (query files).
  const bool canonical_single =
      labels.size() == 1 && (*labels.begin() == 1.0 || *labels.begin() == -1.0);
  if (labels.size() != 2 && !canonical_single) {
    throw ParseError(source, lineno,
                     "expected exactly two distinct labels, found " + std::to_string(labels.size()));
  }

  const std::size_t cols = std::max<std::size_t>(width, 1);
  SvmDataset ds{SparseMatrix(examples.size(), cols), {}, -1.0, 1.0};
  if (labels.size() == 2) {
    ds.negative_label = *labels.begin();
    ds.positive_label = *labels.rbegin();
  }
  SparseMatrixBuilder b(examples.size(), cols);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (!examples[i].cols.empty()) b.append_row(i, examples[i].cols, examples[i].vals);
    ds.y.push_back(examples[i].label == ds.positive_label ? 1.0 : -1.0);
  }
  ds.x = std::move(b).build();
  return ds;
}

SvmDataset read_svm_dataset(const std::string& path, std::size_t features) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_svm_dataset(in, path, features);
}

}  // namespace mrmult
