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


#include "mrmult/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace mrmult {

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double parse_decimal(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: `" + std::string(text) + "`");
  }
  return v;
}

std::string fixed3(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << v;
  return os.str();
}

BenchRow run_cell(const SparseMatrix& a, const SparseMatrix& b, BenchRow row, std::size_t repeats) {
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto res = partition_multiply(a, b, row.schema, row.shard, row.workers);
    const double part = res.metrics[0].total_elapsed().count();
    const double sum = res.metrics[1].total_elapsed().count();
    if (r == 0 || part + sum < row.elapsed_ms) {
      row.partition_ms = part;
      row.summation_ms = sum;
      row.elapsed_ms = part + sum;
    }
    row.nnz_c = res.product.nnz();
    row.shuffle_bytes = res.metrics[0].shuffle_bytes + res.metrics[1].shuffle_bytes;
    row.summation_cross_bytes = res.summation_cross_bytes();
    row.scalar_ops = res.scalar_ops();
  }
  return row;
}

std::string group_key(std::initializer_list<std::pair<const char*, std::string>> parts) {
  std::string out;
  for (const auto& [k, v] : parts) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

}  // namespace

void validate(const BenchConfig& cfg) {
  if (cfg.sizes.empty() || cfg.deltas.empty() || cfg.schemas.empty() || cfg.shards.empty() ||
      cfg.workers.empty()) {
    throw std::invalid_argument("bench: every grid list must be nonempty");
  }
  for (const auto m : cfg.sizes)
    if (m == 0) throw std::invalid_argument("bench: sizes must be >= 1");
  for (const auto d : cfg.deltas)
    if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("bench: delta must lie in [0, 1]");
  for (const auto w : cfg.workers)
    if (w == 0) throw std::invalid_argument("bench: workers must be >= 1");
  if (cfg.repeats == 0) throw std::invalid_argument("bench: repeats must be >= 1");
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg,
                                const std::function<void(const BenchRow&)>& progress) {
  validate(cfg);
  const std::size_t gen_workers = *std::max_element(cfg.workers.begin(), cfg.workers.end());
  std::vector<BenchRow> rows;
  for (const auto m : cfg.sizes) {
    for (const auto delta : cfg.deltas) {
      std::optional<SparseMatrix> a;
      std::optional<SparseMatrix> b;
      std::string gen_error;
      try {
        a = generate_random({m, m, delta, cfg.seed}, gen_workers);
        b = generate_random({m, m, delta, cfg.seed + 1}, gen_workers);
      } catch (const std::exception& e) {
        gen_error = std::string("generate: ") + e.what();
      }
      for (const auto& schema : cfg.schemas) {
        for (const auto shard : cfg.shards) {
          for (const auto w : cfg.workers) {
            BenchRow row;
            row.m = m;
            row.delta = delta;
            row.schema = schema;
            row.shard = shard;
            row.workers = w;
            if (!gen_error.empty()) {
              row.error = gen_error;
            } else {
              row.nnz_a = a->nnz();
              row.nnz_b = b->nnz();
              try {
                row = run_cell(*a, *b, row, cfg.repeats);
              } catch (const std::exception& e) {
                row.error = e.what();
              }
            }
            if (progress) progress(row);
            rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return rows;
}

std::string bench_csv_header() {
  return "m,delta,schema,shard,workers,nnz_a,nnz_b,nnz_c,partition_ms,summation_ms,elapsed_ms,"
         "shuffle_bytes,summation_cross_bytes,scalar_ops,error";
}

std::string bench_csv_row(const BenchRow& r) {
  std::string err = r.error;
  std::replace(err.begin(), err.end(), ',', ';');
  std::replace(err.begin(), err.end(), '\n', ' ');
  std::ostringstream os;
  os << r.m << ',' << format_real(r.delta) << ',' << to_string(r.schema) << ','
     << to_string(r.shard) << ',' << r.workers << ',' << r.nnz_a << ',' << r.nnz_b << ','
     << r.nnz_c << ',' << fixed3(r.partition_ms) << ',' << fixed3(r.summation_ms) << ','
     << fixed3(r.elapsed_ms) << ',' << r.shuffle_bytes << ',' << r.summation_cross_bytes << ','
     << r.scalar_ops << ',' << err;
  return os.str();
}

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
  using SizeKey = std::tuple<double, std::string, std::string, std::size_t>;
  using DeltaKey = std::tuple<std::size_t, std::string, std::string, std::size_t>;
  using SpeedKey = std::tuple<std::size_t, double, std::string, std::string>;
  std::map<SizeKey, std::vector<const BenchRow*>> by_size;
  std::map<DeltaKey, std::vector<const BenchRow*>> by_delta;
  std::map<SpeedKey, std::vector<const BenchRow*>> by_workers;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    const std::string schema = to_string(r.schema);
    const std::string shard(to_string(r.shard));
    by_size[{r.delta, schema, shard, r.workers}].push_back(&r);
    by_delta[{r.m, schema, shard, r.workers}].push_back(&r);
    by_workers[{r.m, r.delta, schema, shard}].push_back(&r);
  }

  std::vector<BenchSummary> out;
  for (const auto& [key, group] : by_size) {
    if (group.size() < 2) continue;
    std::vector<double> m, ops, ms;
    for (const auto* r : group) {
      m.push_back(static_cast<double>(r->m));
      ops.push_back(static_cast<double>(r->scalar_ops));
      ms.push_back(r->elapsed_ms);
    }
    const auto& [delta, schema, shard, w] = key;
    const auto g = group_key({{"delta", format_real(delta)},
                              {"schema", schema},
                              {"shard", shard},
                              {"workers", std::to_string(w)}});
    out.push_back({"ops_slope", g, group.size(), loglog_slope(m, ops)});
    out.push_back({"elapsed_slope", g, group.size(), loglog_slope(m, ms)});
  }
  for (const auto& [key, group] : by_delta) {
    if (group.size() < 2) continue;
    std::vector<double> nnz, ops, ms;
    for (const auto* r : group) {
      nnz.push_back(static_cast<double>(r->nnz()));
      ops.push_back(static_cast<double>(r->scalar_ops));
      ms.push_back(r->elapsed_ms);
    }
    const auto& [m, schema, shard, w] = key;
    const auto g = group_key({{"m", std::to_string(m)},
                              {"schema", schema},
                              {"shard", shard},
                              {"workers", std::to_string(w)}});
    out.push_back({"ops_nnz_corr", g, group.size(), pearson(nnz, ops)});
    out.push_back({"elapsed_nnz_corr", g, group.size(), pearson(nnz, ms)});
  }
  for (const auto& [key, group] : by_workers) {
    const auto base = std::find_if(group.begin(), group.end(),
                                   [](const BenchRow* r) { return r->workers == 1; });
    if (base == group.end() || group.size() < 2) continue;
    const auto& [m, delta, schema, shard] = key;
    for (const auto* r : group) {
      if (r->workers == 1) continue;
      const auto g = group_key({{"m", std::to_string(m)},
                                {"delta", format_real(delta)},
                                {"schema", schema},
                                {"shard", shard},
                                {"workers", std::to_string(r->workers)}});
      out.push_back({"speedup", g, 2, (*base)->elapsed_ms / r->elapsed_ms});
    }
  }
  return out;
}

std::string summary_csv_header() { return "metric,group,points,value"; }

std::string summary_csv_row(const BenchSummary& s) {
  return s.metric + "," + s.group + "," + std::to_string(s.points) + "," + format_real(s.value);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope: need two or more paired points");
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("loglog_slope: values must be positive");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double mx = mean(lx);
  const double my = mean(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
  return sxy / sxx;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("pearson: need two or more paired points");
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

double parse_real(std::string_view text) {
  const auto caret = text.find('^');
  if (caret == std::string_view::npos) return parse_decimal(text);
  return std::pow(parse_decimal(text.substr(0, caret)), parse_decimal(text.substr(caret + 1)));
}

}  // namespace mrmult
