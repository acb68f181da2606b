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

/**
 * @file matmul.hpp
 *
 * The two multiplicative models.
 *
 * partition_multiply is block matrix multiplication as two chained jobs. The
 * partition job cuts A into m x n blocks and B into n x k blocks, copies every
 * A block to all k block-columns and every B block to all m block-rows, and
 * groups them by BlockKey <alpha, beta, gamma>. The summation job multiplies
 * each paired group where it landed and routes the partial rows of output
 * block <alpha, beta> to a summation worker, which adds them in ascending
 * gamma.
 *
 * broadcast_multiply is the row-wise model c_i = r_i B for a small dense B
 * that every worker reads from the broadcast store.
 */

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mrmult/engine.hpp"
#include "mrmult/matrix.hpp"

namespace mrmult {

/// Block-split counts: m row blocks of A, n inner blocks, k column blocks of B.
struct PartitionSchema {
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t k = 1;

  bool operator==(const PartitionSchema&) const = default;
};

/// Parses "20x6x20".
PartitionSchema parse_schema(std::string_view text);
std::string to_string(const PartitionSchema& s);

struct BlockKey {
  std::uint32_t alpha = 0;  ///< row block of A / C, in [0, m)
  std::uint32_t beta = 0;   ///< column block of B / C, in [0, k)
  std::uint32_t gamma = 0;  ///< inner block, in [0, n)

  bool operator==(const BlockKey&) const = default;
};

enum class ShardKind { naive, rand };

ShardKind parse_shard_kind(std::string_view text);
std::string_view to_string(ShardKind kind);

/// alpha mod p. Every block of one output row-block lands on one worker.
std::size_t shard_naive(const BlockKey& key, std::size_t p);

/// block_hash(key) mod p.
std::size_t shard_rand(const BlockKey& key, std::size_t p);

/// splitmix64 finalizer chained over alpha, beta, gamma.
std::uint64_t block_hash(const BlockKey& key);

class ShardFunction {
 public:
  ShardFunction(ShardKind kind, std::size_t workers);

  std::size_t operator()(const BlockKey& key) const {
    return kind_ == ShardKind::naive ? shard_naive(key, workers_) : shard_rand(key, workers_);
  }

  ShardKind kind() const noexcept { return kind_; }
  std::size_t workers() const noexcept { return workers_; }

 private:
  ShardKind kind_;
  std::size_t workers_;
};

/// Index of the block that holds `index` when [0, length) is cut into `parts`
/// near-equal blocks: floor(index * parts / length).
std::size_t block_of(std::size_t index, std::size_t length, std::size_t parts);

struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
};

/// The inverse of block_of: the indices that map to block `block`.
BlockRange block_range(std::size_t length, std::size_t parts, std::size_t block);

struct MultiplyResult {
  SparseMatrix product;
  /// [0] partition job, [1] summation job.
  std::vector<JobMetrics> metrics;

  /// Bytes of A (resp. B) payload emitted by the partition mapper, keys included.
  std::uint64_t a_payload_bytes() const;
  std::uint64_t b_payload_bytes() const;
  /// Partial-result records entering the summation shuffle.
  std::uint64_t partial_records() const { return metrics.at(1).shuffled_records; }
  /// Summation-stage bytes that left the worker where they were multiplied.
  std::uint64_t summation_cross_bytes() const { return metrics.at(1).cross_worker_bytes; }
  std::uint64_t scalar_ops() const;
};

MultiplyResult partition_multiply(const SparseMatrix& a, const SparseMatrix& b,
                                  const PartitionSchema& schema, ShardKind shard,
                                  std::size_t workers);

/// Throws unless 1 <= m <= rows(A), 1 <= n <= cols(A), 1 <= k <= cols(B).
void validate_schema(const PartitionSchema& schema, std::size_t rows_a, std::size_t cols_a,
                     std::size_t cols_b);

Bytes encode_dense(const DenseMatrix& m);
DenseMatrix decode_dense(std::string_view bytes);

/// Row-wise product against a broadcast dense matrix. A's rows are
/// serialized once and reused for every multiply() call, which publishes its
/// right-hand side into a fresh broadcast epoch.
class RowwiseOperand {
 public:
  RowwiseOperand(const SparseMatrix& a, std::size_t workers);

  SparseMatrix multiply(const DenseMatrix& b, JobMetrics* metrics = nullptr);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t workers_;
  RecordSet input_;
  BroadcastStore store_;
};

SparseMatrix broadcast_multiply(const SparseMatrix& a, const DenseMatrix& b_small,
                                std::size_t workers, JobMetrics* metrics = nullptr);

/// Default per-block memory budget used by suggest_schema.
inline constexpr std::size_t kDefaultBlockBudget = std::size_t{64} << 20;

/// Smallest schema with m*k >= workers (where the shapes allow it) and the
/// fewest inner splits that keep one block pair under `block_budget` bytes.
PartitionSchema suggest_schema(std::size_t rows_a, std::size_t cols_a, std::size_t cols_b,
                               std::size_t nnz_a, std::size_t nnz_b, std::size_t workers,
                               std::size_t block_budget = kDefaultBlockBudget);

/// Metrics CSV with the schema and shard columns appended.
std::string multiply_csv_header();
std::string multiply_csv_row(const JobMetrics& m, const PartitionSchema& schema, ShardKind shard);

}  // namespace mrmult
