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


// Straight-line serial implementations used as test oracles. Nothing here
// goes through the engine.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mrmult/matrix.hpp"

namespace mrmult::ref {

/// Row-major dense matrix, independent of the library types.
struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Dense() = default;
  Dense(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}
  double& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
};

Dense from_sparse(const SparseMatrix& m);
SparseMatrix to_sparse(const Dense& d);
Dense transpose(const Dense& a);

/// Triple loop, i-j-p order.
Dense multiply(const Dense& a, const Dense& b);

/// Bernoulli(delta) pattern with values uniform in (0, 1], drawn from mt19937.
Dense random_dense(std::size_t rows, std::size_t cols, double delta, std::mt19937& rng);

/// max |a - b| / max(1, |b|) over all entries.
double max_rel_diff(const Dense& a, const Dense& b);
double max_abs_diff(const Dense& a, const Dense& b);

/// One multiplicative update of H then W, written out loop by loop.
void nmf_step(const Dense& a, Dense& w, Dense& h, double eps);
double nmf_divergence(const Dense& a, const Dense& w, const Dense& h);

/// W(alpha) = sum alpha - 1/2 sum_ij y_i y_j alpha_i alpha_j <t_i, t_j>.
double svm_objective(const Dense& t, const std::vector<double>& y, const std::vector<double>& alpha);

/// f(q) = sum_j alpha_j y_j <t_j, q> for every query row.
std::vector<double> svm_scores(const Dense& t, const std::vector<double>& y,
                               const std::vector<double>& alpha, const Dense& q);

/// Dense transition matrix and damped power iteration, same stopping rule as
/// the library (L1 change below tol, or max_iters).
Dense pagerank_matrix(const std::vector<Edge>& edges, std::size_t n);
std::vector<double> pagerank(const std::vector<Edge>& edges, std::size_t n, double d, double tol,
                             std::size_t max_iters, std::size_t* iterations = nullptr);

/// Erdos-Renyi style directed graph with roughly `avg_out` links per node.
std::vector<Edge> random_graph(std::size_t n, double avg_out, std::mt19937& rng);

}  // namespace mrmult::ref
