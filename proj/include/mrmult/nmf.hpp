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

// Gaussian NMF by multiplicative updates:
//   H <- H .* (W^T A) ./ (W^T W H)
//   W <- W .* (A H^T) ./ (W H H^T)
// Large products go through partition_multiply; the products against the
// small k x k Gram matrices go through broadcast_multiply.

#pragma once

#include <cstdint>
#include <vector>

#include "mrmult/matmul.hpp"
#include "mrmult/matrix.hpp"

namespace mrmult {

struct NmfOptions {
  /// Splits of the long shared dimension in W^T A, W^T W, A H^T and H H^T.
  std::size_t inner_parts = 1;
  /// Splits of the non-k output dimension (columns of W^T A, rows of A H^T).
  /// The k dimension is never split.
  std::size_t outer_parts = 1;
  ShardKind shard = ShardKind::naive;
  double eps = 1e-12;
};

/// Accumulated wall time per update component, in milliseconds.
struct NmfTimings {
  double h_numerator = 0;    ///< X = W^T A
  double h_denominator = 0;  ///< Y = W^T W H
  double h_update = 0;       ///< H = H .* X ./ Y
  double w_numerator = 0;    ///< A H^T
  double w_denominator = 0;  ///< W H H^T
  double w_update = 0;       ///< W = W .* (A H^T) ./ (W H H^T)
};

struct NmfState {
  SparseMatrix w;  ///< m x k, nonnegative
  SparseMatrix h;  ///< k x n, nonnegative
  std::size_t k = 0;
  std::vector<double> divergence_history;
  NmfTimings timings;
};

/// Uniform (0,1) initial factors with a fixed seed; records the initial divergence.
NmfState nmf_init(const SparseMatrix& a, std::size_t k, std::uint64_t seed, std::size_t workers);

/// One full update of H then W; appends ||A - WH||^2.
NmfState nmf_step(const SparseMatrix& a, NmfState state, const NmfOptions& options,
                  std::size_t workers);

/// ||A - WH||^2.
double nmf_divergence(const SparseMatrix& a, const SparseMatrix& w, const SparseMatrix& h);

}  // namespace mrmult
