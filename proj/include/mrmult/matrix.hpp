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
 * @file matrix.hpp
 *
 * Sparse and dense real matrices shared by every stage of the engine.
 *
 * SparseMatrix is row-compressed and immutable once built. Rows keep their
 * column indices strictly ascending and never store an explicit zero, so
 * nnz() is the structural nonzero count used throughout for sparsity.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrmult {

using Index = std::uint32_t;
using DenseVector = std::vector<double>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

  std::span<const double> values() const noexcept { return values_; }

  DenseMatrix transposed() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// A read-only view of one sparse row.
struct SparseRow {
  std::span<const Index> cols;
  std::span<const double> values;

  std::size_t size() const noexcept { return cols.size(); }
  bool empty() const noexcept { return cols.empty(); }
};

class SparseMatrix {
 public:
  /// All-zero matrix. Both dimensions must be at least one.
  SparseMatrix(std::size_t rows, std::size_t cols);

  static SparseMatrix from_dense(const DenseMatrix& dense);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  SparseRow row(std::size_t i) const {
    const auto b = row_ptr_[i];
    const auto e = row_ptr_[i + 1];
    return {std::span<const Index>(col_idx_).subspan(b, e - b),
            std::span<const double>(values_).subspan(b, e - b)};
  }

  /// Entry lookup by binary search; zero when not stored.
  double at(std::size_t i, std::size_t j) const;

  DenseMatrix to_dense() const;

  /// Bit-exact structural and value equality.
  bool operator==(const SparseMatrix&) const = default;

 private:
  friend class SparseMatrixBuilder;
  SparseMatrix() = default;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// Assembles a SparseMatrix row by row. Rows must be appended in ascending
/// order (skipped rows stay empty); within a row, columns must be strictly
/// ascending. Zero values are dropped.
class SparseMatrixBuilder {
 public:
  SparseMatrixBuilder(std::size_t rows, std::size_t cols);

  void append_row(std::size_t row, std::span<const Index> cols, std::span<const double> values);

  /// Appends one entry to `row`, which must be the current or a later row.
  void push(std::size_t row, Index col, double value);

  void reserve(std::size_t nnz);

  SparseMatrix build() &&;

 private:
  void open_row(std::size_t row);

  SparseMatrix m_;
  std::size_t current_row_ = 0;
  std::int64_t last_col_ = -1;
  bool row_open_ = false;
};

SparseMatrix transpose(const SparseMatrix& m);

/// out = h .* x ./ (y + eps), entrywise. All three operands must share a shape.
SparseMatrix elementwise_update(const SparseMatrix& h, const SparseMatrix& x, const SparseMatrix& y,
                                double eps);
DenseMatrix elementwise_update(const DenseMatrix& h, const DenseMatrix& x, const DenseMatrix& y,
                               double eps);

struct GeneratorParams {
  std::size_t m = 1;
  std::size_t n = 1;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// Random sparse matrix: every cell is independently nonzero with
/// probability delta and holds a value uniform in (0,1). Rows are produced by
/// a map/reduce job over `workers` workers; each row draws from its own
/// stream keyed by (seed, row), so the result does not depend on `workers`.
SparseMatrix generate_random(const GeneratorParams& params, std::size_t workers);

// Row-format text I/O.
SparseMatrix read_matrix(const std::string& path);
SparseMatrix read_matrix(std::istream& in, const std::string& source = "<stream>");
void write_matrix(const SparseMatrix& m, const std::string& path);
void write_matrix(const SparseMatrix& m, std::ostream& out);

/// Shortest decimal that parses back to the same double.
std::string format_real(double v);

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;

  bool operator==(const Edge&) const = default;
};

/// Edge-list text: one `src<TAB>dst` pair per line, 0-based ids. Blank lines
/// and lines starting with '#' are skipped.
std::vector<Edge> read_edge_list(const std::string& path);
std::vector<Edge> read_edge_list(std::istream& in, const std::string& source = "<stream>");

}  // namespace mrmult
