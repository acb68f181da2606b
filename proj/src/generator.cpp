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

// Parallel random-matrix generator. The mapper fans a row range out into one
// record per row index; the reducer for row i fills that row.

#include <random>

#include "mrmult/bytes.hpp"
#include "mrmult/engine.hpp"
#include "mrmult/matrix.hpp"

namespace mrmult {

namespace {

// [0,1) with 53 random bits.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// (0,1): midpoint of the 53-bit cell, never exactly zero or one.
double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::mt19937_64 row_stream(std::uint64_t seed, std::uint64_t row) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

SparseMatrix generate_random(const GeneratorParams& params, std::size_t workers) {
  if (params.m == 0 || params.n == 0) throw ShapeError("generate_random: m and n must be >= 1");
  if (!(params.delta >= 0.0 && params.delta <= 1.0)) {
    throw std::invalid_argument("generate_random: delta must lie in [0,1]");
  }
  if (workers == 0) throw std::invalid_argument("generate_random: workers must be >= 1");

  const auto m = params.m;
  const auto n = params.n;
  const auto delta = params.delta;
  const auto seed = params.seed;

  JobSpec job;
  job.name = "generate";
  job.workers = workers;
  job.mapper = [](const KeyedRecord& in, TaskContext& ctx) {
    ByteReader r(in.value);
    const auto begin = r.u64();
    const auto end = r.u64();
    for (auto i = begin; i < end; ++i) ctx.emit(ByteWriter().u64(i).take(), Bytes());
  };
  job.shard = [](std::string_view key, std::size_t p) {
    return static_cast<std::size_t>(ByteReader(key).u64() % p);
  };
  job.reducer = [n, delta, seed](std::string_view key, std::span<const Bytes>, TaskContext& ctx) {
    const auto row = ByteReader(key).u64();
    auto rng = row_stream(seed, row);
    std::vector<Index> cols;
    std::vector<double> vals;
    for (std::size_t j = 0; j < n; ++j) {
      if (unit(rng) < delta) {
        cols.push_back(static_cast<Index>(j));
        vals.push_back(open_unit(rng));
      }
    }
    ctx.emit(Bytes(key), ByteWriter(4 + 12 * cols.size()).entries(cols, vals).take());
  };

  // One seed record per worker, each covering a contiguous run of rows.
  RecordSet input;
  for (std::size_t w = 0; w < workers; ++w) {
    const auto begin = m * w / workers;
    const auto end = m * (w + 1) / workers;
    if (begin == end) continue;
    input.records.push_back({ByteWriter().u64(w).take(), ByteWriter().u64(begin).u64(end).take()});
    input.home.push_back(static_cast<std::uint32_t>(w));
  }

  auto [out, metrics] = run_job(job, input);

  SparseMatrixBuilder b(m, n);
  std::vector<Index> cols;
  std::vector<double> vals;
  for (const auto& rec : out.records) {
    cols.clear();
    vals.clear();
    ByteReader(rec.value).entries([&](std::uint32_t c, double v) {
      cols.push_back(c);
      vals.push_back(v);
    });
    if (!cols.empty()) b.append_row(ByteReader(rec.key).u64(), cols, vals);
  }
  return std::move(b).build();
}

}  // namespace mrmult
