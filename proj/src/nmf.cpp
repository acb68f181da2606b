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

#include "mrmult/nmf.hpp"

#include <algorithm>
#include <chrono>

namespace mrmult {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void require_nonnegative(const SparseMatrix& m, const char* name) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (const double v : m.row(i).values)
      if (!(v >= 0.0)) throw std::invalid_argument(std::string("nmf: negative entry in ") + name);
}

std::size_t clamp_parts(std::size_t parts, std::size_t length) {
  return std::clamp<std::size_t>(parts, 1, length);
}

}  // namespace

double nmf_divergence(const SparseMatrix& a, const SparseMatrix& w, const SparseMatrix& h) {
  if (w.rows() != a.rows() || h.cols() != a.cols() || w.cols() != h.rows()) {
    throw ShapeError("nmf_divergence: shapes do not compose");
  }
  const DenseMatrix hd = h.to_dense();
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
  std::vector<double> partial(a.rows(), 0.0);

#pragma omp parallel
  {
    std::vector<double> approx(a.cols());
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      std::fill(approx.begin(), approx.end(), 0.0);
      const auto wr = w.row(i);
      for (std::size_t p = 0; p < wr.size(); ++p) {
        const auto hrow = hd.row(wr.cols[p]);
        for (std::size_t j = 0; j < approx.size(); ++j) approx[j] += wr.values[p] * hrow[j];
      }
      const auto ar = a.row(i);
      for (std::size_t p = 0; p < ar.size(); ++p) approx[ar.cols[p]] -= ar.values[p];
      double s = 0.0;
      for (const double d : approx) s += d * d;
      partial[i] = s;
    }
  }

  double total = 0.0;
  for (const double s : partial) total += s;
  return total;
}

NmfState nmf_init(const SparseMatrix& a, std::size_t k, std::uint64_t seed, std::size_t workers) {
  if (k == 0 || k > std::min(a.rows(), a.cols())) {
    throw std::invalid_argument("nmf: rank k must satisfy 1 <= k <= min(m, n)");
  }
  NmfState s{generate_random({a.rows(), k, 1.0, seed}, workers),
             generate_random({k, a.cols(), 1.0, seed + 1}, workers),
             k,
             {},
             {}};
  s.divergence_history.push_back(nmf_divergence(a, s.w, s.h));
  return s;
}

NmfState nmf_step(const SparseMatrix& a, NmfState state, const NmfOptions& opt,
                  std::size_t workers) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const std::size_t k = state.k;
  if (state.w.rows() != m || state.w.cols() != k || state.h.rows() != k || state.h.cols() != n) {
    throw ShapeError("nmf_step: W must be " + std::to_string(m) + "x" + std::to_string(k) +
                     " and H " + std::to_string(k) + "x" + std::to_string(n));
  }
  require_nonnegative(a, "A");
  require_nonnegative(state.w, "W");
  require_nonnegative(state.h, "H");

  const std::size_t inner_m = clamp_parts(opt.inner_parts, m);
  const std::size_t inner_n = clamp_parts(opt.inner_parts, n);
  auto& t = state.timings;

  // H update.
  auto t0 = Clock::now();
  const SparseMatrix wt = transpose(state.w);
  const SparseMatrix x =
      partition_multiply(wt, a, {1, inner_m, clamp_parts(opt.outer_parts, n)}, opt.shard, workers)
          .product;
  t.h_numerator += ms_since(t0);

  t0 = Clock::now();
  const DenseMatrix wtw =
      partition_multiply(wt, state.w, {1, inner_m, 1}, opt.shard, workers).product.to_dense();
  // Y^T row j = (row j of H^T) * (W^T W)^T, so only rows of H^T are needed.
  const SparseMatrix yt = broadcast_multiply(transpose(state.h), wtw.transposed(), workers);
  const SparseMatrix y = transpose(yt);
  t.h_denominator += ms_since(t0);

  t0 = Clock::now();
  state.h = elementwise_update(state.h, x, y, opt.eps);
  t.h_update += ms_since(t0);

  // W update with the new H.
  t0 = Clock::now();
  const SparseMatrix ht = transpose(state.h);
  const SparseMatrix aht =
      partition_multiply(a, ht, {clamp_parts(opt.outer_parts, m), inner_n, 1}, opt.shard, workers)
          .product;
  t.w_numerator += ms_since(t0);

  t0 = Clock::now();
  const DenseMatrix hht =
      partition_multiply(state.h, ht, {1, inner_n, 1}, opt.shard, workers).product.to_dense();
  const SparseMatrix whht = broadcast_multiply(state.w, hht, workers);
  t.w_denominator += ms_since(t0);

  t0 = Clock::now();
  state.w = elementwise_update(state.w, aht, whht, opt.eps);
  t.w_update += ms_since(t0);

  state.divergence_history.push_back(nmf_divergence(a, state.w, state.h));
  return state;
}

}  // namespace mrmult
