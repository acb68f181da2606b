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


#include "mrmult/pagerank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mrmult/matmul.hpp"

namespace mrmult {

namespace {

void check_stochastic(const PagerankProblem& prob) {
  if (prob.p.rows() != prob.n || prob.p.cols() != prob.n) {
    throw ShapeError("pagerank: P must be " + std::to_string(prob.n) + "x" + std::to_string(prob.n));
  }
  if (!(prob.d >= 0.0 && prob.d <= 1.0)) throw std::invalid_argument("pagerank: d must lie in [0, 1]");
  std::vector<double> sums(prob.n, 0.0);
  for (std::size_t i = 0; i < prob.n; ++i) {
    const auto r = prob.p.row(i);
    for (std::size_t q = 0; q < r.size(); ++q) {
      if (r.values[q] < 0.0) throw std::invalid_argument("pagerank: negative transition probability");
      sums[r.cols[q]] += r.values[q];
    }
  }
  for (std::size_t j = 0; j < prob.n; ++j) {
    if (std::abs(sums[j] - 1.0) > 1e-12) {
      throw std::invalid_argument("pagerank: column " + std::to_string(j) + " of P sums to " +
                                  format_real(sums[j]));
    }
  }
}

}  // namespace

PagerankProblem pagerank_build(const std::vector<Edge>& edges, double d, std::size_t n) {
  if (n == 0) throw std::invalid_argument("pagerank: graph has no nodes");
  if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("pagerank: d must lie in [0, 1]");

  std::vector<Edge> links = edges;
  for (const auto& e : links) {
    if (e.src >= n || e.dst >= n) {
      throw std::out_of_range("pagerank: edge " + std::to_string(e.src) + " -> " +
                              std::to_string(e.dst) + " names a node >= " + std::to_string(n));
    }
  }
  // Sorted by (dst, src) so each row of P comes out in column order.
  std::sort(links.begin(), links.end(), [](const Edge& a, const Edge& b) {
    return a.dst != b.dst ? a.dst < b.dst : a.src < b.src;
  });
  links.erase(std::unique(links.begin(), links.end()), links.end());

  PagerankProblem prob{SparseMatrix(n, n), d, n, std::vector<std::size_t>(n, 0)};
  for (const auto& e : links) ++prob.outdeg[e.src];

  std::vector<Index> dangling;
  for (std::size_t j = 0; j < n; ++j)
    if (prob.outdeg[j] == 0) dangling.push_back(static_cast<Index>(j));
  const double uniform = 1.0 / static_cast<double>(n);

  SparseMatrixBuilder b(n, n);
  b.reserve(links.size() + dangling.size() * n);
  std::vector<Index> cols;
  std::vector<double> vals;
  auto e = links.begin();
  for (std::size_t i = 0; i < n; ++i) {
    cols.clear();
    vals.clear();
    auto dj = dangling.begin();
    for (; e != links.end() && e->dst == i; ++e) {
      for (; dj != dangling.end() && *dj < e->src; ++dj) {
        cols.push_back(*dj);
        vals.push_back(uniform);
      }
      cols.push_back(static_cast<Index>(e->src));
      vals.push_back(1.0 / static_cast<double>(prob.outdeg[e->src]));
    }
    for (; dj != dangling.end(); ++dj) {
      cols.push_back(*dj);
      vals.push_back(uniform);
    }
    if (!cols.empty()) b.append_row(i, cols, vals);
  }
  prob.p = std::move(b).build();
  return prob;
}

PagerankResult pagerank(const PagerankProblem& prob, double tol, std::size_t max_iters,
                        std::size_t workers) {
  if (!(tol > 0.0)) throw std::invalid_argument("pagerank: tol must be > 0");
  check_stochastic(prob);

  const std::size_t n = prob.n;
  const double teleport = (1.0 - prob.d) / static_cast<double>(n);
  PagerankResult res;
  res.pi.assign(n, 1.0 / static_cast<double>(n));
  res.mass_history.push_back(1.0);

  RowwiseOperand rows(prob.p, workers);
  DenseMatrix column(n, 1);
  DenseVector next(n);
  while (res.iterations < max_iters) {
    for (std::size_t i = 0; i < n; ++i) column(i, 0) = res.pi[i];
    const SparseMatrix ppi = rows.multiply(column);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = ppi.row(i);
      next[i] = prob.d * (r.empty() ? 0.0 : r.values[0]) + teleport;
    }
    double change = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      change += std::abs(next[i] - res.pi[i]);
      mass += next[i];
    }
    res.pi.swap(next);
    ++res.iterations;
    res.residual_history.push_back(change);
    res.mass_history.push_back(mass);
    if (change < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

std::vector<std::pair<std::size_t, double>> sorted_ranks(const DenseVector& pi) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) out.emplace_back(i, pi[i]);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

}  // namespace mrmult
