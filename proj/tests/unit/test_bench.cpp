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


#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mrmult/bench.hpp"

using namespace mrmult;

TEST_CASE("parse_real") {
  CHECK(parse_real("0.25") == 0.25);
  CHECK(parse_real("2^-7") == 0.0078125);
  CHECK(parse_real("2^10") == 1024.0);
  CHECK(parse_real("1e-3") == 0.001);
  for (const char* bad : {"", "x", "2^", "^3", "1.5z", "2^-x"}) CHECK_THROWS(parse_real(bad));
}

TEST_CASE("loglog_slope and pearson") {
  CHECK(loglog_slope({1, 2, 4, 8}, {3, 12, 48, 192}) == doctest::Approx(2.0));
  CHECK(loglog_slope({10, 100}, {5, 5}) == doctest::Approx(0.0));
  CHECK_THROWS(loglog_slope({1}, {1}));
  CHECK_THROWS(loglog_slope({1, 0}, {1, 1}));
  CHECK_THROWS(loglog_slope({2, 2}, {1, 3}));

  CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(std::isnan(pearson({1, 1, 1}, {1, 2, 3})));
}

TEST_CASE("grid runs every cell and keeps going past failures") {
  BenchConfig cfg;
  cfg.sizes = {16, 32, 64};
  cfg.deltas = {0.25, 0.5};
  cfg.schemas = {{2, 2, 2}, {40, 1, 40}};
  cfg.shards = {ShardKind::naive, ShardKind::rand};
  cfg.workers = {1, 2};
  std::size_t seen = 0;
  const auto rows = run_bench(cfg, [&](const BenchRow&) { ++seen; });
  CHECK(rows.size() == 3 * 2 * 2 * 2 * 2);
  CHECK(seen == rows.size());

  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.schema.m == 40 && r.m < 40) {
      CHECK_FALSE(r.error.empty());
      ++failed;
    } else {
      REQUIRE(r.error.empty());
      CHECK(r.scalar_ops > 0);
      CHECK(r.nnz_c > 0);
      if (r.shard == ShardKind::naive) CHECK(r.summation_cross_bytes == 0);
    }
  }
  CHECK(failed == 2 * 2 * 2 * 2);

  // Same operands for every cell of one (m, delta): counts match across cells.
  for (const auto& r : rows)
    for (const auto& q : rows)
      if (r.m == q.m && r.delta == q.delta && r.error.empty() && q.error.empty()) {
        REQUIRE(r.nnz_a == q.nnz_a);
        REQUIRE(r.nnz_c == q.nnz_c);
      }

  const auto summary = summarize(rows);
  bool saw_slope = false, saw_corr = false, saw_speedup = false;
  for (const auto& s : summary) {
    if (s.metric == "ops_slope") {
      saw_slope = true;
      CHECK(s.points >= 2);
      CHECK(s.value > 2.0);
    }
    if (s.metric == "ops_nnz_corr") saw_corr = true;
    if (s.metric == "speedup") saw_speedup = true;
  }
  CHECK(saw_slope);
  CHECK(saw_corr);
  CHECK(saw_speedup);

  CHECK(bench_csv_header().starts_with("m,delta,schema,shard,workers"));
  const auto line = bench_csv_row(rows.front());
  CHECK(line.starts_with("16,0.25,2x2x2,naive,1,"));
  const auto header = bench_csv_header();
  CHECK(std::count(line.begin(), line.end(), ',') == std::count(header.begin(), header.end(), ','));
}

TEST_CASE("config validation") {
  BenchConfig cfg;
  cfg.sizes.clear();
  CHECK_THROWS(validate(cfg));
  cfg = BenchConfig{};
  cfg.deltas = {1.5};
  CHECK_THROWS(validate(cfg));
  cfg = BenchConfig{};
  cfg.workers = {0};
  CHECK_THROWS(validate(cfg));
  CHECK_NOTHROW(validate(BenchConfig{}));
}
