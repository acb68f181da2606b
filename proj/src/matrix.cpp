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

#include "mrmult/matrix.hpp"

#include <algorithm>
#include <limits>

namespace mrmult {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("dense matrix: value count " + std::to_string(values_.size()) +
                     " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("dense matrix: ragged initializer");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

// ---------------------------------------------------------------------------
// SparseMatrix

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("sparse matrix: dimensions must be positive, got " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  }
  if (cols > std::numeric_limits<Index>::max()) {
    throw ShapeError("sparse matrix: column count exceeds index range");
  }
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
  SparseMatrixBuilder b(dense.rows(), dense.cols());
  for (std::size_t i = 0; i < dense.rows(); ++i)
    for (std::size_t j = 0; j < dense.cols(); ++j) b.push(i, static_cast<Index>(j), dense(i, j));
  return std::move(b).build();
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrixBuilder b(n, n);
  for (std::size_t i = 0; i < n; ++i) b.push(i, static_cast<Index>(i), 1.0);
  return std::move(b).build();
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  const auto it = std::lower_bound(r.cols.begin(), r.cols.end(), static_cast<Index>(j));
  if (it == r.cols.end() || *it != j) return 0.0;
  return r.values[static_cast<std::size_t>(it - r.cols.begin())];
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto r = row(i);
    for (std::size_t p = 0; p < r.size(); ++p) d(i, r.cols[p]) = r.values[p];
  }
  return d;
}

// ---------------------------------------------------------------------------
// SparseMatrixBuilder

SparseMatrixBuilder::SparseMatrixBuilder(std::size_t rows, std::size_t cols)
    : m_(SparseMatrix(rows, cols)) {
  m_.row_ptr_.assign(1, 0);
  m_.row_ptr_.reserve(rows + 1);
}

void SparseMatrixBuilder::reserve(std::size_t nnz) {
  m_.col_idx_.reserve(nnz);
  m_.values_.reserve(nnz);
}

// row_ptr_ always holds the start offset of every row up to the open one.
void SparseMatrixBuilder::open_row(std::size_t row) {
  if (row >= m_.rows_) {
    throw std::out_of_range("sparse builder: row " + std::to_string(row) + " out of range " +
                            std::to_string(m_.rows_));
  }
  if (row_open_ && row < current_row_) {
    throw std::invalid_argument("sparse builder: row " + std::to_string(row) +
                                " appended after row " + std::to_string(current_row_));
  }
  if (row_open_ && row == current_row_) return;
  while (m_.row_ptr_.size() < row + 1) m_.row_ptr_.push_back(m_.col_idx_.size());
  current_row_ = row;
  last_col_ = -1;
  row_open_ = true;
}

void SparseMatrixBuilder::push(std::size_t row, Index col, double value) {
  open_row(row);
  if (col >= m_.cols_) {
    throw std::out_of_range("sparse builder: column " + std::to_string(col) + " out of range " +
                            std::to_string(m_.cols_));
  }
  // Dropped zeros still take part in the ordering check.
  if (static_cast<std::int64_t>(col) <= last_col_) {
    throw std::invalid_argument("sparse builder: columns not strictly ascending in row " +
                                std::to_string(row));
  }
  last_col_ = col;
  if (value == 0.0) return;
  m_.col_idx_.push_back(col);
  m_.values_.push_back(value);
}

void SparseMatrixBuilder::append_row(std::size_t row, std::span<const Index> cols,
                                     std::span<const double> values) {
  if (cols.size() != values.size()) {
    throw std::invalid_argument("sparse builder: column/value length mismatch");
  }
  if (row_open_ && row <= current_row_) {
    throw std::invalid_argument("sparse builder: row " + std::to_string(row) +
                                " appended twice or out of order");
  }
  open_row(row);
  for (std::size_t p = 0; p < cols.size(); ++p) push(row, cols[p], values[p]);
}

SparseMatrix SparseMatrixBuilder::build() && {
  while (m_.row_ptr_.size() < m_.rows_ + 1) m_.row_ptr_.push_back(m_.col_idx_.size());
  row_open_ = false;
  return std::move(m_);
}

// ---------------------------------------------------------------------------
// Algebra

SparseMatrix transpose(const SparseMatrix& m) {
  std::vector<std::size_t> counts(m.cols() + 1, 0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (const Index c : m.row(i).cols) ++counts[c + 1];
  for (std::size_t c = 0; c < m.cols(); ++c) counts[c + 1] += counts[c];

  std::vector<Index> cols(m.nnz());
  std::vector<double> vals(m.nnz());
  auto next = counts;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t p = 0; p < r.size(); ++p) {
      const auto dst = next[r.cols[p]]++;
      cols[dst] = static_cast<Index>(i);
      vals[dst] = r.values[p];
    }
  }

  SparseMatrixBuilder b(m.cols(), m.rows());
  b.reserve(m.nnz());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const auto begin = counts[j];
    const auto len = counts[j + 1] - begin;
    if (len == 0) continue;
    b.append_row(j, std::span<const Index>(cols).subspan(begin, len),
                 std::span<const double>(vals).subspan(begin, len));
  }
  return std::move(b).build();
}

namespace {

void require_same_shape(std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1,
                        const char* what) {
  if (r0 != r1 || c0 != c1) {
    throw ShapeError(std::string("elementwise_update: ") + what + " is " + std::to_string(r1) +
                     "x" + std::to_string(c1) + ", expected " + std::to_string(r0) + "x" +
                     std::to_string(c0));
  }
}

}  // namespace

SparseMatrix elementwise_update(const SparseMatrix& h, const SparseMatrix& x, const SparseMatrix& y,
                                double eps) {
  require_same_shape(h.rows(), h.cols(), x.rows(), x.cols(), "X");
  require_same_shape(h.rows(), h.cols(), y.rows(), y.cols(), "Y");

  const auto rows = static_cast<std::ptrdiff_t>(h.rows());
  std::vector<std::vector<Index>> out_cols(h.rows());
  std::vector<std::vector<double>> out_vals(h.rows());

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto hr = h.row(i);
    const auto xr = x.row(i);
    const auto yr = y.row(i);
    std::size_t px = 0, py = 0;
    for (std::size_t p = 0; p < hr.size(); ++p) {
      const Index c = hr.cols[p];
      while (px < xr.size() && xr.cols[px] < c) ++px;
      if (px == xr.size() || xr.cols[px] != c) continue;  // x = 0
      while (py < yr.size() && yr.cols[py] < c) ++py;
      const double yv = (py < yr.size() && yr.cols[py] == c) ? yr.values[py] : 0.0;
      out_cols[i].push_back(c);
      out_vals[i].push_back(hr.values[p] * (xr.values[px] / (yv + eps)));
    }
  }

  SparseMatrixBuilder b(h.rows(), h.cols());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    if (!out_cols[i].empty()) b.append_row(i, out_cols[i], out_vals[i]);
  }
  return std::move(b).build();
}

DenseMatrix elementwise_update(const DenseMatrix& h, const DenseMatrix& x, const DenseMatrix& y,
                               double eps) {
  require_same_shape(h.rows(), h.cols(), x.rows(), x.cols(), "X");
  require_same_shape(h.rows(), h.cols(), y.rows(), y.cols(), "Y");
  DenseMatrix out(h.rows(), h.cols());
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j) out(i, j) = h(i, j) * (x(i, j) / (y(i, j) + eps));
  return out;
}

}  // namespace mrmult
