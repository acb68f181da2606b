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
 * @file engine.hpp
 *
 * A local map/shuffle/reduce runtime over a fixed pool of logical workers.
 *
 * A job runs in three barriered stages. Each input record lives on a home
 * worker and is mapped there. Every emitted record is routed to the worker
 * chosen by the job's shard function; this is the only point where data moves
 * between workers. Each worker then sorts its records by (key, value bytes)
 * and hands every key group to the reducer, so the values a reducer sees and
 * the order it sees them in do not depend on the worker count. Job output is
 * globally ordered by group key, and each output record remembers the worker
 * that produced it so a chained job maps it in place.
 *
 * Workers are OpenMP threads; logical worker ids are fixed by the job spec,
 * not by the number of threads the runtime actually grants.
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <typeindex>
#include <utility>
#include <vector>

#include "mrmult/bytes.hpp"

namespace mrmult {

struct KeyedRecord {
  Bytes key;
  Bytes value;

  std::size_t wire_size() const noexcept { return key.size() + value.size(); }

  auto operator<=>(const KeyedRecord&) const = default;
};

/// Records plus the worker each one currently lives on. An empty `home`
/// means the records are split into contiguous equal runs across workers.
struct RecordSet {
  std::vector<KeyedRecord> records;
  std::vector<std::uint32_t> home;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
};

/// Read-only payloads visible to every task. A name may be written once per
/// epoch; next_epoch() allows each name to be written again, replacing the
/// previous payload.
class BroadcastStore {
 public:
  void put(const std::string& name, Bytes payload);
  void next_epoch();
  void clear();

  std::uint64_t epoch() const noexcept { return epoch_; }
  bool contains(std::string_view name) const;
  std::string_view get(std::string_view name) const;

  /// Decodes the payload once per write and caches the result; safe to call
  /// concurrently from tasks.
  template <typename T, typename Decode>
  const T& view(std::string_view name, Decode&& decode) const {
    const auto& e = entry(name);
    std::call_once(e.once, [&] {
      e.decoded = std::make_shared<T>(decode(std::string_view(e.payload)));
      e.type = std::type_index(typeid(T));
    });
    if (e.type != std::type_index(typeid(T))) {
      throw std::logic_error("broadcast `" + std::string(name) + "` viewed as two types");
    }
    return *static_cast<const T*>(e.decoded.get());
  }

 private:
  struct Entry {
    Bytes payload;
    std::uint64_t epoch = 0;
    mutable std::once_flag once;
    mutable std::shared_ptr<const void> decoded;
    mutable std::type_index type = std::type_index(typeid(void));
  };

  const Entry& entry(std::string_view name) const;

  std::map<std::string, std::shared_ptr<Entry>, std::less<>> entries_;
  std::uint64_t epoch_ = 0;
};

/// Publishes `payload` under `name`; throws if the name was already written in
/// the store's current epoch.
void broadcast(BroadcastStore& store, const std::string& name, Bytes payload);

class JobError : public std::runtime_error {
 public:
  JobError(std::string stage, std::string key, const std::string& what);

  const std::string& stage() const noexcept { return stage_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::string stage_;
  std::string key_;
};

class TaskContext;

using Mapper = std::function<void(const KeyedRecord& input, TaskContext& ctx)>;
using Reducer =
    std::function<void(std::string_view key, std::span<const Bytes> values, TaskContext& ctx)>;
using ShardFn = std::function<std::size_t(std::string_view key, std::size_t workers)>;

struct JobSpec {
  std::string name = "job";
  Mapper mapper;
  /// Empty for a map-only job: mapper output becomes job output in place,
  /// nothing is shuffled.
  Reducer reducer;
  /// Defaults to hash_shard when empty.
  ShardFn shard;
  std::size_t workers = 1;
  const BroadcastStore* broadcast = nullptr;
};

using Millis = std::chrono::duration<double, std::milli>;

struct JobMetrics {
  std::string stage;
  std::size_t workers = 0;
  /// Serialized size of every record crossing the map/reduce boundary.
  std::uint64_t shuffle_bytes = 0;
  std::uint64_t shuffled_records = 0;
  /// Portion of shuffle_bytes whose destination differs from the emitting worker.
  std::uint64_t cross_worker_bytes = 0;
  std::vector<std::uint64_t> records_per_worker;
  Millis map_elapsed{0};
  Millis shuffle_elapsed{0};
  Millis reduce_elapsed{0};
  std::uint64_t scalar_ops = 0;
  /// Named counters reported by tasks.
  std::map<std::string, std::uint64_t> counters;

  Millis total_elapsed() const { return map_elapsed + shuffle_elapsed + reduce_elapsed; }
};

class TaskContext {
 public:
  std::size_t worker() const noexcept { return worker_; }
  std::size_t workers() const noexcept { return workers_; }

  const BroadcastStore& broadcast() const;

  void emit(Bytes key, Bytes value);

  /// Multiply-add operations performed by this task.
  void add_ops(std::uint64_t n) noexcept { ops_ += n; }
  void count(const std::string& counter, std::uint64_t n) { counters_[counter] += n; }

 private:
  friend class JobRunner;
  TaskContext(std::size_t worker, std::size_t workers, const BroadcastStore* store)
      : worker_(worker), workers_(workers), store_(store) {}

  std::size_t worker_;
  std::size_t workers_;
  const BroadcastStore* store_;
  std::function<void(Bytes&&, Bytes&&)> sink_;
  std::uint64_t ops_ = 0;
  std::map<std::string, std::uint64_t> counters_;
};

/// Default shard: a fixed 64-bit hash of the key bytes, modulo workers.
std::size_t hash_shard(std::string_view key, std::size_t workers);

std::pair<RecordSet, JobMetrics> run_job(const JobSpec& spec, const RecordSet& input);

/// Runs jobs in sequence, feeding each one's output (in place) to the next.
std::pair<RecordSet, std::vector<JobMetrics>> chain(std::span<const JobSpec> jobs,
                                                    const RecordSet& input);

/// CSV header and row: stage,shuffle_bytes,map_ms,shuffle_ms,reduce_ms,scalar_ops,workers,cross_worker_bytes
std::string metrics_csv_header();
std::string metrics_csv_row(const JobMetrics& m);

}  // namespace mrmult
