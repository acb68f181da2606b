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


// PageRank by the damped power method
//   pi <- d P pi + (1 - d) / N
// where P is the column-stochastic link matrix with dangling columns replaced
// by the uniform distribution.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mrmult/matrix.hpp"

namespace mrmult {

struct PagerankProblem {
  SparseMatrix p;  ///< N x N, P(i, j) = 1 / outdeg(j) for every link j -> i
  double d = 0.85;
  std::size_t n = 0;
  std::vector<std::size_t> outdeg;  ///< distinct outlinks per node; 0 marks a dangling node
};

/// Duplicate edges count once. Throws on ids >= n or d outside [0, 1].
PagerankProblem pagerank_build(const std::vector<Edge>& edges, double d, std::size_t n);

struct PagerankResult {
  DenseVector pi;
  std::size_t iterations = 0;
  /// ||pi^{t+1} - pi^t||_1 per iteration.
  std::vector<double> residual_history;
  /// sum(pi^t), starting with the uniform start vector.
  std::vector<double> mass_history;
  bool converged = false;
};

/// Power iteration from the uniform vector until the L1 change drops below
/// `tol` or `max_iters` iterations have run. Each P pi is a broadcast row-wise
/// multiply. Throws std::invalid_argument if P is not column-stochastic.
PagerankResult pagerank(const PagerankProblem& prob, double tol = 1e-8, std::size_t max_iters = 100,
                        std::size_t workers = 1);

/// (node, rank) pairs sorted by rank descending, ties by node id.
std::vector<std::pair<std::size_t, double>> sorted_ranks(const DenseVector& pi);

}  // namespace mrmult
