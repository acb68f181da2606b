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

#include "mrmult/matmul.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "mrmult/bytes.hpp"

namespace mrmult {

namespace {

constexpr std::uint8_t kTagA = 'A';
constexpr std::uint8_t kTagB = 'B';

Bytes encode_key(const BlockKey& k) { return ByteWriter(12).u32(k.alpha).u32(k.beta).u32(k.gamma).take(); }

BlockKey decode_key(std::string_view bytes) {
  ByteReader r(bytes);
  BlockKey k;
  k.alpha = r.u32();
  k.beta = r.u32();
  k.gamma = r.u32();
  return k;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Entries of `row` with begin <= col < end.
SparseRow slice(const SparseRow& row, std::size_t begin, std::size_t end) {
  const auto lo = std::lower_bound(row.cols.begin(), row.cols.end(), static_cast<Index>(begin));
  const auto hi = std::lower_bound(lo, row.cols.end(), static_cast<Index>(std::min<std::size_t>(end, UINT32_MAX)));
  const auto off = static_cast<std::size_t>(lo - row.cols.begin());
  const auto len = static_cast<std::size_t>(hi - lo);
  return {row.cols.subspan(off, len), row.values.subspan(off, len)};
}

// Dense scatter accumulator over a column window that remembers which slots
// were touched, so extraction is proportional to the touched count.
class Accumulator {
 public:
  explicit Accumulator(std::size_t width) : acc_(width, 0.0), seen_(width, 0) {}

  void add(std::size_t slot, double v) {
    if (!seen_[slot]) {
      seen_[slot] = 1;
      touched_.push_back(static_cast<Index>(slot));
    }
    acc_[slot] += v;
  }

  bool empty() const noexcept { return touched_.empty(); }

  /// Writes nonzero entries as (offset + slot, value), ascending, and resets.
  void flush(std::size_t offset, std::vector<Index>& cols, std::vector<double>& vals) {
    std::sort(touched_.begin(), touched_.end());
    cols.clear();
    vals.clear();
    for (const auto s : touched_) {
      if (acc_[s] != 0.0) {
        cols.push_back(static_cast<Index>(offset + s));
        vals.push_back(acc_[s]);
      }
      acc_[s] = 0.0;
      seen_[s] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<double> acc_;
  std::vector<char> seen_;
  std::vector<Index> touched_;
};

struct SubRows {
  std::vector<std::uint32_t> index;
  std::vector<std::size_t> ptr{0};
  std::vector<Index> cols;
  std::vector<double> vals;

  void read(ByteReader& r, std::uint32_t count) {
    for (std::uint32_t q = 0; q < count; ++q) {
      index.push_back(r.u32());
      r.entries([&](std::uint32_t c, double v) {
        cols.push_back(c);
        vals.push_back(v);
      });
      ptr.push_back(cols.size());
    }
  }
};

std::uint64_t counter(const JobMetrics& m, const char* name) {
  const auto it = m.counters.find(name);
  return it == m.counters.end() ? 0 : it->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// Schemas and shards

PartitionSchema parse_schema(std::string_view text) {
  PartitionSchema s;
  std::size_t* fields[3] = {&s.m, &s.n, &s.k};
  std::size_t pos = 0;
  for (int f = 0; f < 3; ++f) {
    const auto end = f < 2 ? text.find('x', pos) : text.size();
    if (end == std::string_view::npos) break;
    const auto part = text.substr(pos, end - pos);
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), *fields[f]);
    if (ec != std::errc() || ptr != part.data() + part.size() || *fields[f] == 0) {
      throw std::invalid_argument("bad partition schema `" + std::string(text) +
                                  "`, expected MxNxK with positive counts");
    }
    if (f == 2) return s;
    pos = end + 1;
  }
  throw std::invalid_argument("bad partition schema `" + std::string(text) +
                              "`, expected MxNxK with positive counts");
}

std::string to_string(const PartitionSchema& s) {
  return std::to_string(s.m) + "x" + std::to_string(s.n) + "x" + std::to_string(s.k);
}

ShardKind parse_shard_kind(std::string_view text) {
  if (text == "naive") return ShardKind::naive;
  if (text == "rand") return ShardKind::rand;
  throw std::invalid_argument("unknown shard function `" + std::string(text) +
                              "`, expected naive or rand");
}

std::string_view to_string(ShardKind kind) { return kind == ShardKind::naive ? "naive" : "rand"; }

std::uint64_t block_hash(const BlockKey& key) {
  std::uint64_t h = splitmix64(key.alpha);
  h = splitmix64(h ^ key.beta);
  return splitmix64(h ^ key.gamma);
}

std::size_t shard_naive(const BlockKey& key, std::size_t p) { return key.alpha % p; }

std::size_t shard_rand(const BlockKey& key, std::size_t p) {
  return static_cast<std::size_t>(block_hash(key) % p);
}

ShardFunction::ShardFunction(ShardKind kind, std::size_t workers) : kind_(kind), workers_(workers) {
  if (workers == 0) throw std::invalid_argument("shard function: workers must be >= 1");
}

std::size_t block_of(std::size_t index, std::size_t length, std::size_t parts) {
  return index * parts / length;
}

BlockRange block_range(std::size_t length, std::size_t parts, std::size_t block) {
  // ceil(block * length / parts)
  return {(block * length + parts - 1) / parts, ((block + 1) * length + parts - 1) / parts};
}

void validate_schema(const PartitionSchema& s, std::size_t rows_a, std::size_t cols_a,
                     std::size_t cols_b) {
  if (s.m < 1 || s.n < 1 || s.k < 1 || s.m > rows_a || s.n > cols_a || s.k > cols_b) {
    throw std::invalid_argument("partition schema " + to_string(s) + " out of bounds for " +
                                std::to_string(rows_a) + "x" + std::to_string(cols_a) + " times " +
                                std::to_string(cols_a) + "x" + std::to_string(cols_b));
  }
}

// ---------------------------------------------------------------------------
// Partition-summation multiply

std::uint64_t MultiplyResult::a_payload_bytes() const { return counter(metrics.at(0), "a_payload_bytes"); }
std::uint64_t MultiplyResult::b_payload_bytes() const { return counter(metrics.at(0), "b_payload_bytes"); }

std::uint64_t MultiplyResult::scalar_ops() const {
  std::uint64_t ops = 0;
  for (const auto& m : metrics) ops += m.scalar_ops;
  return ops;
}

MultiplyResult partition_multiply(const SparseMatrix& a, const SparseMatrix& b,
                                  const PartitionSchema& schema, ShardKind shard_kind,
                                  std::size_t workers) {
  if (a.cols() != b.rows()) {
    throw ShapeError("partition_multiply: A is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " but B is " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
  validate_schema(schema, a.rows(), a.cols(), b.cols());
  const ShardFunction shard(shard_kind, workers);

  const std::size_t rows_a = a.rows();
  const std::size_t inner = a.cols();
  const std::size_t cols_b = b.cols();
  const PartitionSchema s = schema;

  // Input: every row of A then every row of B, tagged.
  RecordSet input;
  input.records.reserve(a.rows() + b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    if (r.empty()) continue;
    input.records.push_back({ByteWriter(5).u8(kTagA).u32(static_cast<std::uint32_t>(i)).take(),
                             ByteWriter(4 + 12 * r.size()).entries(r.cols, r.values).take()});
  }
  for (std::size_t l = 0; l < b.rows(); ++l) {
    const auto r = b.row(l);
    if (r.empty()) continue;
    input.records.push_back({ByteWriter(5).u8(kTagB).u32(static_cast<std::uint32_t>(l)).take(),
                             ByteWriter(4 + 12 * r.size()).entries(r.cols, r.values).take()});
  }

  JobSpec partition;
  partition.name = "partition";
  partition.workers = workers;
  partition.shard = [shard](std::string_view key, std::size_t) { return shard(decode_key(key)); };
  partition.mapper = [s, rows_a, inner, cols_b](const KeyedRecord& in, TaskContext& ctx) {
    ByteReader kr(in.key);
    const auto tag = kr.u8();
    const auto index = kr.u32();
    std::vector<Index> cols;
    std::vector<double> vals;
    ByteReader(in.value).entries([&](std::uint32_t c, double v) {
      cols.push_back(c);
      vals.push_back(v);
    });
    const SparseRow row{cols, vals};

    if (tag == kTagA) {
      const auto alpha = static_cast<std::uint32_t>(block_of(index, rows_a, s.m));
      for (std::size_t gamma = 0; gamma < s.n; ++gamma) {
        const auto range = block_range(inner, s.n, gamma);
        const auto sub = slice(row, range.begin, range.end);
        if (sub.empty()) continue;
        const auto payload = ByteWriter(9 + 12 * sub.size()).u8(kTagA).u32(index).entries(sub.cols, sub.values).take();
        for (std::size_t beta = 0; beta < s.k; ++beta) {
          auto key = encode_key({alpha, static_cast<std::uint32_t>(beta), static_cast<std::uint32_t>(gamma)});
          ctx.count("a_payload_bytes", key.size() + payload.size());
          ctx.emit(std::move(key), payload);
        }
      }
    } else {
      const auto gamma = static_cast<std::uint32_t>(block_of(index, inner, s.n));
      for (std::size_t beta = 0; beta < s.k; ++beta) {
        const auto range = block_range(cols_b, s.k, beta);
        const auto sub = slice(row, range.begin, range.end);
        if (sub.empty()) continue;
        const auto payload = ByteWriter(9 + 12 * sub.size()).u8(kTagB).u32(index).entries(sub.cols, sub.values).take();
        for (std::size_t alpha = 0; alpha < s.m; ++alpha) {
          auto key = encode_key({static_cast<std::uint32_t>(alpha), static_cast<std::uint32_t>(beta), gamma});
          ctx.count("b_payload_bytes", key.size() + payload.size());
          ctx.emit(std::move(key), payload);
        }
      }
    }
  };
  // Values arrive sorted, so A sub-rows (tag 'A') precede B sub-rows.
  partition.reducer = [](std::string_view key, std::span<const Bytes> values, TaskContext& ctx) {
    std::size_t na = 0;
    while (na < values.size() && static_cast<std::uint8_t>(values[na][0]) == kTagA) ++na;
    const std::size_t nb = values.size() - na;
    if (na == 0 || nb == 0) return;  // block pair has a zero operand
    std::size_t bytes = 8;
    for (const auto& v : values) bytes += v.size() - 1;
    ByteWriter w(bytes);
    w.u32(static_cast<std::uint32_t>(na));
    for (std::size_t q = 0; q < na; ++q) w.raw(std::string_view(values[q]).substr(1));
    w.u32(static_cast<std::uint32_t>(nb));
    for (std::size_t q = na; q < values.size(); ++q) w.raw(std::string_view(values[q]).substr(1));
    ctx.emit(Bytes(key), std::move(w).take());
  };

  // Summation keys are <alpha, i, beta>: one group per output row segment,
  // and group order is row-major.
  JobSpec summation;
  summation.name = "summation";
  summation.workers = workers;
  summation.shard = [shard](std::string_view key, std::size_t) {
    ByteReader r(key);
    const auto alpha = r.u32();
    r.u32();
    const auto beta = r.u32();
    return shard(BlockKey{alpha, beta, 0});
  };
  summation.mapper = [s, inner, cols_b](const KeyedRecord& in, TaskContext& ctx) {
    const auto key = decode_key(in.key);
    const auto inner_range = block_range(inner, s.n, key.gamma);
    const auto col_range = block_range(cols_b, s.k, key.beta);

    ByteReader r(in.value);
    SubRows arows, brows;
    arows.read(r, r.u32());
    brows.read(r, r.u32());

    std::vector<std::int32_t> slot(inner_range.size(), -1);
    for (std::size_t q = 0; q < brows.index.size(); ++q)
      slot[brows.index[q] - inner_range.begin] = static_cast<std::int32_t>(q);

    Accumulator acc(col_range.size());
    std::vector<Index> cols;
    std::vector<double> vals;
    std::uint64_t ops = 0;
    for (std::size_t q = 0; q < arows.index.size(); ++q) {
      for (auto p = arows.ptr[q]; p < arows.ptr[q + 1]; ++p) {
        const auto bq = slot[arows.cols[p] - inner_range.begin];
        if (bq < 0) continue;
        const double av = arows.vals[p];
        for (auto t = brows.ptr[bq]; t < brows.ptr[bq + 1]; ++t) {
          acc.add(brows.cols[t] - col_range.begin, av * brows.vals[t]);
        }
        ops += brows.ptr[bq + 1] - brows.ptr[bq];
      }
      if (acc.empty()) continue;
      acc.flush(col_range.begin, cols, vals);
      if (cols.empty()) continue;
      ctx.emit(ByteWriter(12).u32(key.alpha).u32(arows.index[q]).u32(key.beta).take(),
               ByteWriter(8 + 12 * cols.size()).u32(key.gamma).entries(cols, vals).take());
    }
    ctx.add_ops(ops);
  };
  // Partials arrive in ascending gamma (big-endian gamma prefix).
  summation.reducer = [s, cols_b](std::string_view key, std::span<const Bytes> values,
                                  TaskContext& ctx) {
    ByteReader kr(key);
    kr.u32();
    const auto row = kr.u32();
    const auto beta = kr.u32();
    const auto col_range = block_range(cols_b, s.k, beta);
    Accumulator acc(col_range.size());
    for (const auto& v : values) {
      ByteReader r(v);
      r.u32();
      r.entries([&](std::uint32_t c, double x) { acc.add(c - col_range.begin, x); });
    }
    std::vector<Index> cols;
    std::vector<double> vals;
    acc.flush(col_range.begin, cols, vals);
    if (cols.empty()) return;
    ctx.emit(ByteWriter(8).u32(row).u32(beta).take(),
             ByteWriter(4 + 12 * cols.size()).entries(cols, vals).take());
  };

  const JobSpec jobs[] = {std::move(partition), std::move(summation)};
  auto [out, metrics] = chain(jobs, input);

  SparseMatrixBuilder builder(a.rows(), b.cols());
  std::size_t current = SIZE_MAX;
  std::vector<Index> cols;
  std::vector<double> vals;
  auto flush_row = [&] {
    if (current != SIZE_MAX && !cols.empty()) builder.append_row(current, cols, vals);
    cols.clear();
    vals.clear();
  };
  for (const auto& rec : out.records) {
    const auto row = ByteReader(rec.key).u32();
    if (row != current) {
      flush_row();
      current = row;
    }
    ByteReader(rec.value).entries([&](std::uint32_t c, double v) {
      cols.push_back(c);
      vals.push_back(v);
    });
  }
  flush_row();

  return MultiplyResult{std::move(builder).build(), std::move(metrics)};
}

// ---------------------------------------------------------------------------
// Broadcast multiply

Bytes encode_dense(const DenseMatrix& m) {
  ByteWriter w(16 + 8 * m.values().size());
  w.u64(m.rows()).u64(m.cols());
  for (const double v : m.values()) w.f64(v);
  return std::move(w).take();
}

DenseMatrix decode_dense(std::string_view bytes) {
  ByteReader r(bytes);
  const auto rows = r.u64();
  const auto cols = r.u64();
  std::vector<double> values(rows * cols);
  for (auto& v : values) v = r.f64();
  return DenseMatrix(rows, cols, std::move(values));
}

RowwiseOperand::RowwiseOperand(const SparseMatrix& a, std::size_t workers)
    : rows_(a.rows()), cols_(a.cols()), workers_(workers) {
  if (workers == 0) throw std::invalid_argument("broadcast_multiply: workers must be >= 1");
  // Rows are split across workers in contiguous runs; empty rows produce
  // nothing and are skipped.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    if (r.empty()) continue;
    input_.records.push_back({ByteWriter(4).u32(static_cast<std::uint32_t>(i)).take(),
                              ByteWriter(4 + 12 * r.size()).entries(r.cols, r.values).take()});
  }
}

SparseMatrix RowwiseOperand::multiply(const DenseMatrix& b, JobMetrics* metrics) {
  if (b.rows() != cols_) {
    throw ShapeError("broadcast_multiply: A is " + std::to_string(rows_) + "x" +
                     std::to_string(cols_) + " but B is " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
  store_.next_epoch();
  broadcast(store_, "B", encode_dense(b));

  JobSpec job;
  job.name = "broadcast";
  job.workers = workers_;
  job.broadcast = &store_;
  job.mapper = [](const KeyedRecord& in, TaskContext& ctx) {
    const auto& rhs = ctx.broadcast().view<DenseMatrix>("B", decode_dense);
    std::vector<double> acc(rhs.cols(), 0.0);
    std::uint64_t terms = 0;
    ByteReader(in.value).entries([&](std::uint32_t l, double a) {
      const auto brow = rhs.row(l);
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += a * brow[j];
      ++terms;
    });
    ctx.add_ops(terms * acc.size());
    std::vector<Index> cols;
    std::vector<double> vals;
    for (std::size_t j = 0; j < acc.size(); ++j) {
      if (acc[j] != 0.0) {
        cols.push_back(static_cast<Index>(j));
        vals.push_back(acc[j]);
      }
    }
    if (!cols.empty()) ctx.emit(Bytes(in.key), ByteWriter(4 + 12 * cols.size()).entries(cols, vals).take());
  };

  auto [out, m] = run_job(job, input_);
  if (metrics) *metrics = std::move(m);

  SparseMatrixBuilder builder(rows_, b.cols());
  std::vector<Index> cols;
  std::vector<double> vals;
  for (const auto& rec : out.records) {
    cols.clear();
    vals.clear();
    ByteReader(rec.value).entries([&](std::uint32_t c, double v) {
      cols.push_back(c);
      vals.push_back(v);
    });
    builder.append_row(ByteReader(rec.key).u32(), cols, vals);
  }
  return std::move(builder).build();
}

SparseMatrix broadcast_multiply(const SparseMatrix& a, const DenseMatrix& b_small,
                                std::size_t workers, JobMetrics* metrics) {
  RowwiseOperand op(a, workers);
  return op.multiply(b_small, metrics);
}

// ---------------------------------------------------------------------------
// Schema heuristic

PartitionSchema suggest_schema(std::size_t rows_a, std::size_t cols_a, std::size_t cols_b,
                               std::size_t nnz_a, std::size_t nnz_b, std::size_t workers,
                               std::size_t block_budget) {
  if (rows_a == 0 || cols_a == 0 || cols_b == 0) {
    throw std::invalid_argument("suggest_schema: shapes must be positive");
  }
  PartitionSchema s;
  // Grow whichever side currently has the taller blocks.
  while (s.m * s.k < workers) {
    const bool can_m = s.m < rows_a;
    const bool can_k = s.k < cols_b;
    if (!can_m && !can_k) break;
    const double row_block = static_cast<double>(rows_a) / static_cast<double>(s.m);
    const double col_block = static_cast<double>(cols_b) / static_cast<double>(s.k);
    if (can_m && (!can_k || row_block >= col_block)) {
      ++s.m;
    } else {
      ++s.k;
    }
  }
  // One block pair holds ~nnz_a/(m n) + nnz_b/(n k) entries of 12 bytes.
  constexpr double kEntryBytes = 12.0;
  const double per_split = kEntryBytes * (static_cast<double>(nnz_a) / static_cast<double>(s.m) +
                                          static_cast<double>(nnz_b) / static_cast<double>(s.k));
  const double budget = static_cast<double>(std::max<std::size_t>(block_budget, 1));
  const auto need = static_cast<std::size_t>(std::ceil(per_split / budget));
  s.n = std::clamp<std::size_t>(need, 1, cols_a);
  return s;
}

std::string multiply_csv_header() { return metrics_csv_header() + ",schema,shard"; }

std::string multiply_csv_row(const JobMetrics& m, const PartitionSchema& schema, ShardKind shard) {
  return metrics_csv_row(m) + "," + to_string(schema) + "," + std::string(to_string(shard));
}

}  // namespace mrmult
