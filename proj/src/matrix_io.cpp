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

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <utility>

#include "mrmult/matrix.hpp"

namespace mrmult {

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const auto start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

SparseMatrix read_matrix(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header line");
  ++lineno;
  const auto header = split_ws(line);
  std::size_t rows = 0, cols = 0, nnz = 0;
  if (header.size() != 3 || !parse_number(header[0], rows) || !parse_number(header[1], cols) ||
      !parse_number(header[2], nnz)) {
    throw ParseError(source, lineno, "header must be `<rows> <cols> <nnz>`");
  }
  if (rows == 0 || cols == 0) throw ParseError(source, lineno, "dimensions must be positive");

  // Rows may appear in any order, so collect them first.
  struct PendingRow {
    std::size_t index;
    std::vector<Index> cols;
    std::vector<double> values;
    std::size_t line;
  };
  std::vector<PendingRow> pending;
  std::size_t listed = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(source, lineno, "expected `<row>\\t<entries>`");

    PendingRow r{0, {}, {}, lineno};
    if (!parse_number(std::string_view(line).substr(0, tab), r.index)) {
      throw ParseError(source, lineno, "bad row index");
    }
    if (r.index >= rows) {
      throw ParseError(source, lineno,
                       "row index " + std::to_string(r.index) + " exceeds header rows " +
                           std::to_string(rows));
    }
    for (const auto tok : split_ws(std::string_view(line).substr(tab + 1))) {
      const auto colon = tok.find(':');
      std::size_t c = 0;
      double v = 0;
      if (colon == std::string_view::npos || !parse_number(tok.substr(0, colon), c) ||
          !parse_number(tok.substr(colon + 1), v)) {
        throw ParseError(source, lineno, "bad entry `" + std::string(tok) + "`");
      }
      if (c >= cols) {
        throw ParseError(source, lineno,
                         "column " + std::to_string(c) + " exceeds header cols " +
                             std::to_string(cols));
      }
      if (!r.cols.empty() && c <= r.cols.back()) {
        throw ParseError(source, lineno, "column indices must be strictly ascending");
      }
      r.cols.push_back(static_cast<Index>(c));
      r.values.push_back(v);
    }
    listed += r.cols.size();
    pending.push_back(std::move(r));
  }

  if (listed != nnz) {
    throw ParseError(source, lineno,
                     "header declares " + std::to_string(nnz) + " entries, body lists " +
                         std::to_string(listed));
  }

  std::stable_sort(pending.begin(), pending.end(),
                   [](const PendingRow& a, const PendingRow& b) { return a.index < b.index; });
  SparseMatrixBuilder b(rows, cols);
  b.reserve(nnz);
  for (std::size_t p = 0; p < pending.size(); ++p) {
    if (p > 0 && pending[p].index == pending[p - 1].index) {
      throw ParseError(source, pending[p].line,
                       "row " + std::to_string(pending[p].index) + " listed twice");
    }
    b.append_row(pending[p].index, pending[p].cols, pending[p].values);
  }
  return std::move(b).build();
}

SparseMatrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_matrix(in, path);
}

void write_matrix(const SparseMatrix& m, std::ostream& out) {
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  std::string line;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    if (r.empty()) continue;
    line = std::to_string(i);
    line += '\t';
    for (std::size_t p = 0; p < r.size(); ++p) {
      if (p > 0) line += ' ';
      line += std::to_string(r.cols[p]);
      line += ':';
      line += format_real(r.values[p]);
    }
    line += '\n';
    out << line;
  }
}

void write_matrix(const SparseMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_matrix(m, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Edge> read_edge_list(std::istream& in, const std::string& source) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_ws(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    Edge e;
    if (fields.size() != 2 || !parse_number(fields[0], e.src) || !parse_number(fields[1], e.dst)) {
      throw ParseError(source, lineno, "expected `<src>\\t<dst>`");
    }
    edges.push_back(e);
  }
  return edges;
}

std::vector<Edge> read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_edge_list(in, path);
}

}  // namespace mrmult
