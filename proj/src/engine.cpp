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

#include "mrmult/engine.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <optional>
#include <sstream>

namespace mrmult {

// ---------------------------------------------------------------------------
// Broadcast store

void BroadcastStore::put(const std::string& name, Bytes payload) {
  auto it = entries_.find(name);
  if (it != entries_.end() && it->second->epoch == epoch_) {
    throw std::invalid_argument("broadcast `" + name + "` already written in epoch " +
                                std::to_string(epoch_));
  }
  auto e = std::make_shared<Entry>();
  e->payload = std::move(payload);
  e->epoch = epoch_;
  entries_[name] = std::move(e);
}

void BroadcastStore::next_epoch() { ++epoch_; }

void BroadcastStore::clear() { entries_.clear(); }

bool BroadcastStore::contains(std::string_view name) const {
  return entries_.find(name) != entries_.end();
}

const BroadcastStore::Entry& BroadcastStore::entry(std::string_view name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::out_of_range("broadcast `" + std::string(name) + "` not found");
  }
  return *it->second;
}

std::string_view BroadcastStore::get(std::string_view name) const { return entry(name).payload; }

void broadcast(BroadcastStore& store, const std::string& name, Bytes payload) {
  store.put(name, std::move(payload));
}

// ---------------------------------------------------------------------------

JobError::JobError(std::string stage, std::string key, const std::string& what)
    : std::runtime_error(stage + " failed on key of " + std::to_string(key.size()) +
                         " bytes: " + what),
      stage_(std::move(stage)),
      key_(std::move(key)) {}

const BroadcastStore& TaskContext::broadcast() const {
  if (store_ == nullptr) throw std::logic_error("job has no broadcast store");
  return *store_;
}

void TaskContext::emit(Bytes key, Bytes value) { sink_(std::move(key), std::move(value)); }

std::size_t hash_shard(std::string_view key, std::size_t workers) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : key) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return static_cast<std::size_t>(h % workers);
}

// ---------------------------------------------------------------------------
// Job execution

namespace {

using Clock = std::chrono::steady_clock;

struct Failure {
  std::string key;
  std::string what;
};

bool record_less(const KeyedRecord& a, const KeyedRecord& b) {
  if (const int c = a.key.compare(b.key); c != 0) return c < 0;
  return a.value < b.value;
}

template <typename F>
void for_each_worker(std::size_t workers, F&& body) {
  const auto p = static_cast<std::ptrdiff_t>(workers);
#pragma omp parallel for schedule(static, 1) num_threads(static_cast<int>(workers))
  for (std::ptrdiff_t w = 0; w < p; ++w) body(static_cast<std::size_t>(w));
}

std::optional<Failure> first_failure(std::vector<std::optional<Failure>>& failures) {
  for (auto& f : failures)
    if (f) return std::move(f);
  return std::nullopt;
}

}  // namespace

class JobRunner {
 public:
  static std::pair<RecordSet, JobMetrics> run(const JobSpec& spec, const RecordSet& input);
};

std::pair<RecordSet, JobMetrics> JobRunner::run(const JobSpec& spec, const RecordSet& input) {
  if (spec.workers == 0) throw std::invalid_argument("job `" + spec.name + "`: workers must be >= 1");
  if (!spec.mapper) throw std::invalid_argument("job `" + spec.name + "`: no mapper");
  if (!input.home.empty() && input.home.size() != input.records.size()) {
    throw std::invalid_argument("job `" + spec.name + "`: home vector length mismatch");
  }

  const std::size_t p = spec.workers;
  const bool map_only = !spec.reducer;
  const ShardFn shard = spec.shard ? spec.shard : ShardFn(hash_shard);
  const std::size_t n = input.records.size();

  JobMetrics metrics;
  metrics.stage = spec.name;
  metrics.workers = p;
  metrics.records_per_worker.assign(p, 0);

  std::vector<std::vector<std::size_t>> local(p);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t w = input.home.empty() ? r * p / n : input.home[r] % p;
    local[w].push_back(r);
  }

  struct WorkerStats {
    std::uint64_t bytes = 0;
    std::uint64_t cross = 0;
    std::uint64_t records = 0;
    std::uint64_t ops = 0;
    std::map<std::string, std::uint64_t> counters;
  };
  std::vector<WorkerStats> stats(p);
  // buckets[src][dst]
  std::vector<std::vector<std::vector<KeyedRecord>>> buckets(p,
                                                              std::vector<std::vector<KeyedRecord>>(p));
  std::vector<std::optional<Failure>> failures(p);

  // Map.
  auto t0 = Clock::now();
  for_each_worker(p, [&](std::size_t w) {
    TaskContext ctx(w, p, spec.broadcast);
    auto& st = stats[w];
    auto& out = buckets[w];
    ctx.sink_ = [&](Bytes&& key, Bytes&& value) {
      std::size_t dst = w;
      if (!map_only) {
        dst = shard(key, p);
        if (dst >= p) {
          throw std::out_of_range("shard function returned worker " + std::to_string(dst) +
                                  " of " + std::to_string(p));
        }
        const auto sz = key.size() + value.size();
        st.bytes += sz;
        st.records += 1;
        if (dst != w) st.cross += sz;
      }
      out[dst].push_back(KeyedRecord{std::move(key), std::move(value)});
    };
    for (const auto r : local[w]) {
      try {
        spec.mapper(input.records[r], ctx);
      } catch (const std::exception& e) {
        failures[w] = Failure{input.records[r].key, e.what()};
        return;
      }
    }
    st.ops += ctx.ops_;
    for (auto& [k, v] : ctx.counters_) st.counters[k] += v;
  });
  auto t1 = Clock::now();
  metrics.map_elapsed = t1 - t0;
  if (auto f = first_failure(failures)) throw JobError(spec.name + "/map", f->key, f->what);

  for (const auto& st : stats) {
    metrics.shuffle_bytes += st.bytes;
    metrics.cross_worker_bytes += st.cross;
    metrics.shuffled_records += st.records;
  }

  RecordSet output;

  if (map_only) {
    // Records stay on the worker that produced them.
    std::vector<std::pair<KeyedRecord, std::uint32_t>> all;
    for (std::size_t w = 0; w < p; ++w)
      for (auto& rec : buckets[w][w]) all.emplace_back(std::move(rec), static_cast<std::uint32_t>(w));
    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return record_less(a.first, b.first); });
    output.records.reserve(all.size());
    output.home.reserve(all.size());
    for (auto& [rec, w] : all) {
      output.records.push_back(std::move(rec));
      output.home.push_back(w);
    }
    for (const auto& st : stats) {
      metrics.scalar_ops += st.ops;
      for (const auto& [k, v] : st.counters) metrics.counters[k] += v;
    }
    metrics.shuffle_elapsed = Millis(0);
    metrics.reduce_elapsed = Clock::now() - t1;
    return {std::move(output), std::move(metrics)};
  }

  // Shuffle: every worker pulls its buckets from all sources, then sorts.
  struct Partition {
    std::vector<Bytes> keys;
    std::vector<std::size_t> offsets;  // group g spans values[offsets[g], offsets[g+1])
    std::vector<Bytes> values;
  };
  std::vector<Partition> parts(p);
  for_each_worker(p, [&](std::size_t d) {
    std::vector<KeyedRecord> recs;
    std::size_t total = 0;
    for (std::size_t s = 0; s < p; ++s) total += buckets[s][d].size();
    recs.reserve(total);
    for (std::size_t s = 0; s < p; ++s) {
      auto& b = buckets[s][d];
      std::move(b.begin(), b.end(), std::back_inserter(recs));
      std::vector<KeyedRecord>().swap(b);
    }
    std::sort(recs.begin(), recs.end(), record_less);

    auto& part = parts[d];
    part.values.reserve(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (i == 0 || recs[i].key != recs[i - 1].key) {
        part.offsets.push_back(i);
        part.keys.push_back(recs[i].key);
      }
      part.values.push_back(std::move(recs[i].value));
    }
    part.offsets.push_back(recs.size());
    metrics.records_per_worker[d] = recs.size();
  });
  auto t2 = Clock::now();
  metrics.shuffle_elapsed = t2 - t1;

  // Reduce.
  std::vector<std::vector<KeyedRecord>> reduced(p);
  std::vector<std::vector<std::size_t>> group_begin(p);
  for_each_worker(p, [&](std::size_t d) {
    TaskContext ctx(d, p, spec.broadcast);
    auto& out = reduced[d];
    ctx.sink_ = [&](Bytes&& key, Bytes&& value) {
      out.push_back(KeyedRecord{std::move(key), std::move(value)});
    };
    const auto& part = parts[d];
    const std::span<const Bytes> values(part.values);
    for (std::size_t g = 0; g < part.keys.size(); ++g) {
      group_begin[d].push_back(out.size());
      try {
        spec.reducer(part.keys[g],
                     values.subspan(part.offsets[g], part.offsets[g + 1] - part.offsets[g]), ctx);
      } catch (const std::exception& e) {
        failures[d] = Failure{part.keys[g], e.what()};
        return;
      }
    }
    group_begin[d].push_back(out.size());
    stats[d].ops += ctx.ops_;
    for (auto& [k, v] : ctx.counters_) stats[d].counters[k] += v;
  });
  if (auto f = first_failure(failures)) throw JobError(spec.name + "/reduce", f->key, f->what);

  // Gather outputs in global group-key order; keys are unique across workers.
  struct GroupRef {
    std::string_view key;
    std::uint32_t worker;
    std::size_t group;
  };
  std::vector<GroupRef> order;
  for (std::size_t d = 0; d < p; ++d)
    for (std::size_t g = 0; g < parts[d].keys.size(); ++g)
      order.push_back({parts[d].keys[g], static_cast<std::uint32_t>(d), g});
  std::sort(order.begin(), order.end(),
            [](const GroupRef& a, const GroupRef& b) { return a.key < b.key; });

  std::size_t total_out = 0;
  for (const auto& r : reduced) total_out += r.size();
  output.records.reserve(total_out);
  output.home.reserve(total_out);
  for (const auto& ref : order) {
    auto& src = reduced[ref.worker];
    for (auto i = group_begin[ref.worker][ref.group]; i < group_begin[ref.worker][ref.group + 1]; ++i) {
      output.records.push_back(std::move(src[i]));
      output.home.push_back(ref.worker);
    }
  }

  for (const auto& st : stats) {
    metrics.scalar_ops += st.ops;
    for (const auto& [k, v] : st.counters) metrics.counters[k] += v;
  }
  metrics.reduce_elapsed = Clock::now() - t2;
  return {std::move(output), std::move(metrics)};
}

std::pair<RecordSet, JobMetrics> run_job(const JobSpec& spec, const RecordSet& input) {
  return JobRunner::run(spec, input);
}

std::pair<RecordSet, std::vector<JobMetrics>> chain(std::span<const JobSpec> jobs,
                                                    const RecordSet& input) {
  if (jobs.empty()) throw std::invalid_argument("chain: no jobs");
  std::vector<JobMetrics> metrics;
  auto [out, m] = run_job(jobs[0], input);
  metrics.push_back(std::move(m));
  for (std::size_t j = 1; j < jobs.size(); ++j) {
    auto [next, mj] = run_job(jobs[j], out);
    out = std::move(next);
    metrics.push_back(std::move(mj));
  }
  return {std::move(out), std::move(metrics)};
}

std::string metrics_csv_header() {
  return "stage,shuffle_bytes,map_ms,shuffle_ms,reduce_ms,scalar_ops,workers,cross_worker_bytes";
}

std::string metrics_csv_row(const JobMetrics& m) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << m.stage << ',' << m.shuffle_bytes << ',' << m.map_elapsed.count() << ','
     << m.shuffle_elapsed.count() << ',' << m.reduce_elapsed.count() << ',' << m.scalar_ops << ','
     << m.workers << ',' << m.cross_worker_bytes;
  return os.str();
}

}  // namespace mrmult
