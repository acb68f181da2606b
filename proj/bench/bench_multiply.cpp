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


// Engine products against the serial reference loops.

#include <benchmark/benchmark.h>

#include "mrmult/matmul.hpp"
#include "mrmult/pagerank.hpp"
#include "reference.hpp"

namespace {

using namespace mrmult;

void BM_PartitionMultiply(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto workers = static_cast<std::size_t>(state.range(1));
  const auto a = generate_random({m, m, 1.0 / 32, 1}, 1);
  const auto b = generate_random({m, m, 1.0 / 32, 2}, 1);
  std::uint64_t ops = 0;
  for (auto _ : state) {
    auto r = partition_multiply(a, b, {4, 2, 4}, ShardKind::naive, workers);
    ops = r.scalar_ops();
    benchmark::DoNotOptimize(r.product);
  }
  state.counters["scalar_ops"] = static_cast<double>(ops);
}
BENCHMARK(BM_PartitionMultiply)->ArgsProduct({{256, 512, 1024}, {1, 4}})->Unit(benchmark::kMillisecond);

void BM_SerialMultiply(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto a = ref::from_sparse(generate_random({m, m, 1.0 / 32, 1}, 1));
  const auto b = ref::from_sparse(generate_random({m, m, 1.0 / 32, 2}, 1));
  for (auto _ : state) benchmark::DoNotOptimize(ref::multiply(a, b));
}
BENCHMARK(BM_SerialMultiply)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_BroadcastMultiply(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto workers = static_cast<std::size_t>(state.range(1));
  const auto a = generate_random({m, m, 1.0 / 16, 3}, 1);
  const DenseMatrix b(m, 16, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(broadcast_multiply(a, b, workers));
}
BENCHMARK(BM_BroadcastMultiply)->ArgsProduct({{1024, 4096}, {1, 4}})->Unit(benchmark::kMillisecond);

void BM_SerialBroadcast(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto a = ref::from_sparse(generate_random({m, m, 1.0 / 16, 3}, 1));
  const ref::Dense b(m, 16, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(ref::multiply(a, b));
}
BENCHMARK(BM_SerialBroadcast)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Pagerank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto workers = static_cast<std::size_t>(state.range(1));
  std::mt19937 rng(4);
  const auto prob = pagerank_build(ref::random_graph(n, 5.0, rng), 0.85, n);
  for (auto _ : state) benchmark::DoNotOptimize(pagerank(prob, 1e-8, 100, workers));
}
BENCHMARK(BM_Pagerank)->ArgsProduct({{500, 2000}, {1, 4}})->Unit(benchmark::kMillisecond);

void BM_SerialPagerank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937 rng(4);
  const auto edges = ref::random_graph(n, 5.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ref::pagerank(edges, n, 0.85, 1e-8, 100));
}
BENCHMARK(BM_SerialPagerank)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
