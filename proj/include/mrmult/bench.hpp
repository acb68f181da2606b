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


// Grid runner for the multiply scaling experiments.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrmult/matmul.hpp"

namespace mrmult {

struct BenchConfig {
  std::vector<std::size_t> sizes{256, 512, 1024, 2048, 4096};
  std::vector<double> deltas{0.0078125};
  std::vector<PartitionSchema> schemas{{4, 2, 4}};
  std::vector<ShardKind> shards{ShardKind::naive};
  std::vector<std::size_t> workers{1};
  std::uint64_t seed = 1;
  /// Runs per cell; elapsed columns keep the fastest run.
  std::size_t repeats = 1;
};

/// Throws std::invalid_argument when a list is empty or a value is out of range.
void validate(const BenchConfig& cfg);

struct BenchRow {
  std::size_t m = 0;
  double delta = 0;
  PartitionSchema schema;
  ShardKind shard = ShardKind::naive;
  std::size_t workers = 1;
  std::uint64_t nnz_a = 0;
  std::uint64_t nnz_b = 0;
  std::uint64_t nnz_c = 0;
  double partition_ms = 0;
  double summation_ms = 0;
  double elapsed_ms = 0;
  std::uint64_t shuffle_bytes = 0;
  std::uint64_t summation_cross_bytes = 0;
  std::uint64_t scalar_ops = 0;
  /// Non-empty when the cell failed; the numeric columns are then zero.
  std::string error;

  std::uint64_t nnz() const noexcept { return nnz_a + nnz_b; }
};

/// m x m operands A and B drawn with seeds `seed` and `seed + 1`, one fresh
/// pair per (m, delta); every cell multiplies A B. A failing cell is recorded
/// and the grid continues. `progress` sees each row as it finishes.
std::vector<BenchRow> run_bench(const BenchConfig& cfg,
                                const std::function<void(const BenchRow&)>& progress = {});

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);

struct BenchSummary {
  std::string metric;
  /// Fixed coordinates of the group, e.g. "delta=0.0078125;schema=4x2x4;shard=naive;workers=1".
  std::string group;
  std::size_t points = 0;
  double value = 0;
};

/// Fits over the successful rows:
///   ops_slope      log-log slope of scalar_ops against m, per (delta, schema, shard, workers)
///   elapsed_slope  the same for elapsed_ms
///   ops_nnz_corr   Pearson r of scalar_ops and input nnz, per (m, schema, shard, workers)
///   elapsed_nnz_corr
///   speedup        elapsed(1 worker) / elapsed(w), per (m, delta, schema, shard, w)
/// Groups with fewer than two points are skipped.
std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows);

std::string summary_csv_header();
std::string summary_csv_row(const BenchSummary& s);

/// Least-squares slope of log(y) against log(x). Needs two or more positive points.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Pearson correlation coefficient; NaN when either series is constant.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Decimal, or `base^exponent` (e.g. `2^-7`).
double parse_real(std::string_view text);

}  // namespace mrmult
