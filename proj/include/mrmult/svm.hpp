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

// Fixed-bias soft-margin SVM with a linear kernel, trained by projected
// gradient ascent on the dual
//   W(a) = sum_i a_i - 1/2 sum_ij y_i y_j a_i a_j K_ij,   0 <= a_i <= C.
// The bias is held at zero, so there is no equality constraint.

#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "mrmult/matmul.hpp"
#include "mrmult/matrix.hpp"

namespace mrmult {

struct SvmProblem {
  SparseMatrix t;  ///< l x b, one training example per row
  DenseVector y;   ///< labels in {-1, +1}
  double c = 1.0;
  double eta = 0.001;
};

struct SvmState {
  DenseVector alpha;
  SparseMatrix k;  ///< l x l Gram matrix T T^T
  std::vector<double> objective_history;
};

/// K = T T^T through partition_multiply.
SparseMatrix svm_build_kernel(const SparseMatrix& t, const PartitionSchema& schema,
                              std::size_t workers, ShardKind shard = ShardKind::naive);

/// Dual objective W(alpha).
double svm_objective(const DenseVector& alpha, const DenseVector& y, const SparseMatrix& k);

/// g_i = eta * (1 - y_i sum_j y_j alpha_j K_ij). K D is a broadcast multiply
/// of K's rows against D = y .* alpha.
DenseVector svm_gradient(const SvmState& state, const SvmProblem& prob, std::size_t workers);

using SvmObserver = std::function<void(std::size_t iter, const DenseVector& alpha)>;

/// alpha <- clip(alpha + g(alpha), 0, C), `iters` times from alpha = 0.
/// objective_history holds W(alpha) before the first and after every update.
SvmState svm_train(const SvmProblem& prob, std::size_t iters, std::size_t workers,
                   const SvmObserver& observer = {});

/// Raw decision values f(q) = sum_j alpha_j y_j <x_j, q>; the class is sign(f).
DenseVector svm_predict(const SvmState& state, const SvmProblem& prob, const SparseMatrix& q,
                        std::size_t workers);

/// Fraction of scores whose sign matches the label (a zero score counts as wrong).
double svm_accuracy(const DenseVector& scores, const DenseVector& labels);

struct SvmDataset {
  SparseMatrix x;
  DenseVector y;
  /// Original label values mapped to -1 and +1.
  double negative_label = -1;
  double positive_label = 1;
};

/// `<label> <index>:<value> ...` per line, indices 0-based ascending. Labels
/// take two values (the smaller maps to -1), or a single value of -1 or +1.
/// `features` widens the column count beyond the largest index seen.
SvmDataset read_svm_dataset(const std::string& path, std::size_t features = 0);
SvmDataset read_svm_dataset(std::istream& in, const std::string& source, std::size_t features = 0);

}  // namespace mrmult
