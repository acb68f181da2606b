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

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>

#include "mrmult/matrix.hpp"
#include "reference.hpp"
#include "stats.hpp"

using namespace mrmult;

namespace {

SparseMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return read_matrix(in, "test");
}

std::string dump(const SparseMatrix& m) {
  std::ostringstream out;
  write_matrix(m, out);
  return out.str();
}

SparseMatrix random_sparse(std::size_t r, std::size_t c, double delta, unsigned seed) {
  std::mt19937 rng(seed);
  return ref::to_sparse(ref::random_dense(r, c, delta, rng));
}

}  // namespace

TEST_CASE("sparse matrix construction drops zeros and keeps rows sorted") {
  const auto m = SparseMatrix::from_dense({{0, 2, 0}, {1, 0, 3}});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.nnz() == 3);
  CHECK(m.at(0, 1) == 2);
  CHECK(m.at(1, 2) == 3);
  CHECK(m.at(0, 0) == 0);
  CHECK(m.to_dense() == DenseMatrix{{0, 2, 0}, {1, 0, 3}});
  CHECK_THROWS_AS(SparseMatrix(0, 0), ShapeError);
  CHECK_THROWS_AS(SparseMatrix(3, 0), ShapeError);
}

TEST_CASE("builder rejects out-of-order input") {
  SparseMatrixBuilder b(3, 3);
  b.push(1, 0, 1.0);
  b.push(1, 2, 0.0);  // dropped, but still ordered
  CHECK_THROWS(b.push(1, 1, 1.0));
  CHECK_THROWS(b.push(0, 0, 1.0));
  CHECK_THROWS(b.push(2, 3, 1.0));
  b.push(2, 2, 5.0);
  const auto m = std::move(b).build();
  CHECK(m.nnz() == 2);
}

TEST_CASE("read_matrix transcribes entries") {
  const auto m = parse("4 4 2\n0\t1:2.5\n3\t0:1.0\n");
  CHECK(m.rows() == 4);
  CHECK(m.nnz() == 2);
  CHECK(m.at(0, 1) == 2.5);
  CHECK(m.at(3, 0) == 1.0);

  const auto z = parse("3 3 0\n");
  CHECK(z.rows() == 3);
  CHECK(z.nnz() == 0);
}

TEST_CASE("read_matrix reports bad input with a line number") {
  auto line_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("3 3 2\n0\t2:1 1:3\n") == 2);
  CHECK(line_of("3 3 2\n0\t1:1 1:3\n") == 2);
  CHECK(line_of("3 3 1\n0\t3:1\n") == 2);
  CHECK(line_of("3 3 1\n5\t0:1\n") == 2);
  CHECK(line_of("3 3 2\n0\t0:1\n1\t0:x\n") == 3);
  CHECK(line_of("3 3\n") == 1);
  CHECK_THROWS_AS(parse("3 3 3\n0\t0:1\n"), ParseError);
  CHECK_THROWS_AS(parse("3 3 2\n0\t0:1\n0\t1:1\n"), ParseError);
}

TEST_CASE("write then read is the identity") {
  CHECK(parse(dump(SparseMatrix::identity(3))) == SparseMatrix::identity(3));
  const auto r = random_sparse(64, 64, 0.1, 7);
  const auto text = dump(r);
  CHECK(parse(text) == r);
  CHECK(dump(parse(text)) == text);

  const auto odd = SparseMatrix::from_dense({{0.1, 1e-300, -2.5e17}, {1.0 / 3.0, 0, 0}});
  CHECK(parse(dump(odd)) == odd);
}

TEST_CASE("format_real round-trips") {
  for (const double v : {0.1, 1.0 / 3.0, 1e-310, 6.02214076e23, -0.0078125}) {
    CHECK(std::strtod(format_real(v).c_str(), nullptr) == v);
  }
  CHECK(format_real(2.5) == "2.5");
}

TEST_CASE("transpose") {
  CHECK(transpose(SparseMatrix::from_dense({{1, 2}, {0, 3}})) ==
        SparseMatrix::from_dense({{1, 0}, {2, 3}}));
  const auto sym = SparseMatrix::from_dense({{1, 4, 0}, {4, 2, 5}, {0, 5, 3}});
  CHECK(transpose(sym) == sym);

  const auto r = random_sparse(100, 37, 0.2, 3);
  const auto t = transpose(r);
  CHECK(t.rows() == 37);
  CHECK(t.nnz() == r.nnz());
  CHECK(transpose(t) == r);
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t j = 0; j < r.cols(); ++j) REQUIRE(t.at(j, i) == r.at(i, j));
}

TEST_CASE("elementwise_update") {
  SUBCASE("scalar") {
    const auto one = [](double v) { return SparseMatrix::from_dense({{v}}); };
    CHECK(elementwise_update(one(1), one(8), one(4), 0.0).at(0, 0) == 2.0);
    CHECK(elementwise_update(DenseMatrix{{1}}, DenseMatrix{{8}}, DenseMatrix{{4}}, 0.0)(0, 0) == 2.0);
  }
  SUBCASE("x equal to y is a fixed point") {
    const auto h = random_sparse(20, 30, 0.5, 1);
    const auto x = random_sparse(20, 30, 1.0, 2);
    CHECK(elementwise_update(h, x, x, 0.0) == h);
  }
  SUBCASE("zero denominator stays finite") {
    const auto h = SparseMatrix::from_dense({{1, 1}});
    const auto x = SparseMatrix::from_dense({{2, 2}});
    const auto y = SparseMatrix::from_dense({{0, 1}});
    const auto out = elementwise_update(h, x, y, 1e-12);
    CHECK(std::isfinite(out.at(0, 0)));
    CHECK(out.at(0, 0) == doctest::Approx(2e12));
    CHECK(out.at(0, 1) == doctest::Approx(2.0));
  }
  SUBCASE("out * y equals h * x") {
    const auto h = random_sparse(15, 12, 0.6, 4);
    const auto x = random_sparse(15, 12, 0.7, 5);
    const auto y = random_sparse(15, 12, 1.0, 6);
    const auto out = elementwise_update(h, x, y, 0.0);
    for (std::size_t i = 0; i < 15; ++i)
      for (std::size_t j = 0; j < 12; ++j) {
        const double lhs = out.at(i, j) * y.at(i, j);
        const double rhs = h.at(i, j) * x.at(i, j);
        REQUIRE(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
      }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(elementwise_update(SparseMatrix(2, 2), SparseMatrix(2, 3), SparseMatrix(2, 2), 0.0),
                    ShapeError);
  }
}

TEST_CASE("generator edge densities") {
  CHECK(generate_random({4, 4, 1.0, 9}, 2).nnz() == 16);
  CHECK(generate_random({4, 4, 0.0, 9}, 2).nnz() == 0);
  CHECK_THROWS(generate_random({4, 4, 1.5, 9}, 1));
  CHECK_THROWS(generate_random({0, 4, 0.5, 9}, 1));

  const auto full = generate_random({50, 40, 1.0, 3}, 3);
  for (std::size_t i = 0; i < full.rows(); ++i)
    for (const double v : full.row(i).values) REQUIRE((v > 0.0 && v < 1.0));
}

TEST_CASE("generator is independent of the worker count") {
  const GeneratorParams p{300, 200, 0.05, 42};
  const auto base = generate_random(p, 1);
  for (const std::size_t w : {2, 3, 4, 8, 16}) CHECK(generate_random(p, w) == base);
  CHECK(generate_random({300, 200, 0.05, 43}, 1) != base);
}

TEST_CASE("generator nnz and row counts follow the binomial law") {
  const std::size_t m = 1000, n = 1000;
  const double delta = 1.0 / 128.0;
  const auto g = generate_random({m, n, delta, 2026}, 4);
  const double mean = m * n * delta;
  const double sigma = std::sqrt(m * n * delta * (1 - delta));
  CHECK(std::abs(static_cast<double>(g.nnz()) - mean) <= 4 * sigma);

  std::vector<std::uint64_t> per_row(m);
  std::vector<std::uint64_t> per_col_block(20, 0);
  std::vector<std::uint64_t> value_bins(20, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = g.row(i);
    per_row[i] = r.size();
    for (std::size_t p = 0; p < r.size(); ++p) {
      ++per_col_block[r.cols[p] * 20 / n];
      ++value_bins[static_cast<std::size_t>(r.values[p] * 20)];
    }
  }
  CHECK(ref::binomial_gof_pvalue(per_row, n, delta) > 0.001);
  CHECK(ref::uniform_gof_pvalue(per_col_block) > 0.001);
  CHECK(ref::uniform_gof_pvalue(value_bins) > 0.001);
}

TEST_CASE("edge list parsing") {
  std::istringstream in("# comment\n0\t1\n\n1\t0\n2 0\n");
  const auto e = read_edge_list(in, "g");
  REQUIRE(e.size() == 3);
  CHECK(e[0] == Edge{0, 1});
  CHECK(e[2] == Edge{2, 0});
  std::istringstream bad("0\t1\n1\n");
  CHECK_THROWS_AS(read_edge_list(bad, "g"), ParseError);
  std::istringstream neg("0\t-1\n");
  CHECK_THROWS_AS(read_edge_list(neg, "g"), ParseError);
}
