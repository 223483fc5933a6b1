#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gravae/matrix.hpp"
#include "gravae/rng.hpp"
#include "gravae/sparse.hpp"

using namespace gravae;

TEST_CASE("out-degree normalization on a star graph") {
  // hub 0 points at 1, 2, 3; row 0 spreads mass over self + 3 targets
  DirectedGraph g = make_graph(4, {{0, 1}, {0, 2}, {0, 3}});
  SparseRowMatrix m = out_degree_normalize(g);
  DenseMatrix d = sparse_to_dense(m);
  for (int j = 0; j < 4; ++j) REQUIRE(d.at(0, j) == 0.25);
  for (int i = 1; i < 4; ++i) {
    REQUIRE(d.at(i, i) == 1.0);  // leaves have out-degree 0
    for (int j = 0; j < 4; ++j)
      if (j != i) REQUIRE(d.at(i, j) == 0.0);
  }
}

TEST_CASE("normalized adjacency rows sum to one and hit the right columns") {
  Rng rng(41);
  std::vector<Edge> edges;
  for (int k = 0; k < 80; ++k)
    edges.emplace_back(static_cast<int>(rng.uniform_int(25)),
                       static_cast<int>(rng.uniform_int(25)));
  DirectedGraph g = make_graph(25, edges);
  SparseRowMatrix m = out_degree_normalize(g);
  DenseMatrix d = sparse_to_dense(m);
  for (int i = 0; i < 25; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 25; ++j) {
      sum += d.at(i, j);
      bool expected = (i == j) || g.has_edge(i, j);
      REQUIRE((d.at(i, j) != 0.0) == expected);
      if (expected)
        REQUIRE(std::abs(d.at(i, j) - 1.0 / (g.out_degree(i) + 1)) < 1e-15);
    }
    REQUIRE(std::abs(sum - 1.0) < 1e-12);
  }
  // column indices strictly increasing inside each row
  for (int i = 0; i < 25; ++i)
    for (int k = m.offsets[i] + 1; k < m.offsets[i + 1]; ++k)
      REQUIRE(m.col_index[k] > m.col_index[k - 1]);
}

TEST_CASE("spmm matches dense multiplication") {
  Rng rng(42);
  std::vector<Edge> edges;
  for (int k = 0; k < 30; ++k)
    edges.emplace_back(static_cast<int>(rng.uniform_int(10)),
                       static_cast<int>(rng.uniform_int(10)));
  DirectedGraph g = make_graph(10, edges);
  SparseRowMatrix m = out_degree_normalize(g);
  DenseMatrix x(10, 6);
  for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
  DenseMatrix got = spmm(m, x);
  DenseMatrix want = matmul(sparse_to_dense(m), x);
  REQUIRE(max_abs_diff(got, want) < 1e-12);
}

TEST_CASE("sparse transpose is the dense transpose") {
  Rng rng(43);
  std::vector<Edge> edges;
  for (int k = 0; k < 40; ++k)
    edges.emplace_back(static_cast<int>(rng.uniform_int(12)),
                       static_cast<int>(rng.uniform_int(12)));
  DirectedGraph g = make_graph(12, edges);
  SparseRowMatrix m = out_degree_normalize(g);
  SparseRowMatrix t = sparse_transpose(m);
  REQUIRE(max_abs_diff(sparse_to_dense(t), transpose(sparse_to_dense(m))) == 0.0);
}

TEST_CASE("empty graph normalizes to the identity") {
  DirectedGraph g = make_graph(5, {});
  DenseMatrix d = sparse_to_dense(out_degree_normalize(g));
  REQUIRE(max_abs_diff(d, identity(5)) == 0.0);
}
