#include <cmath>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "gravae/baselines.hpp"
#include "gravae/graph.hpp"
#include "gravae/matrix.hpp"
#include "gravae/rng.hpp"

using namespace gravae;

namespace {

DirectedGraph random_digraph(int n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng.uniform01() < p) edges.push_back({i, j});
  return make_graph(n, edges);
}

DenseMatrix dense_adjacency(const DirectedGraph& g) {
  DenseMatrix a(g.n, g.n);
  for (const Edge& e : g.edges) a.at(e.first, e.second) = 1.0;
  return a;
}

// Truncated Neumann series beta A + (beta A)^2 + ... computed densely.
DenseMatrix neumann_katz(const DirectedGraph& g, double beta, int terms) {
  DenseMatrix a = dense_adjacency(g);
  for (double& v : a.data) v *= beta;
  DenseMatrix term = a, sum = a;
  for (int t = 1; t < terms; ++t) {
    term = matmul(a, term);
    for (std::size_t k = 0; k < sum.data.size(); ++k) sum.data[k] += term.data[k];
  }
  return sum;
}

}  // namespace

TEST_CASE("katz apply is exact on a nilpotent adjacency") {
  // Single edge 0 -> 1: A^2 = 0, so S = beta A with no truncation error.
  DirectedGraph g = make_graph(2, {{0, 1}});
  DenseMatrix s = katz_apply(g, 0.5, identity(2));
  REQUIRE(s.at(0, 0) == 0.0);
  REQUIRE(s.at(0, 1) == 0.5);
  REQUIRE(s.at(1, 0) == 0.0);
  REQUIRE(s.at(1, 1) == 0.0);
}

TEST_CASE("katz apply matches a 50-term dense Neumann series") {
  DirectedGraph g = random_digraph(10, 0.3, 11);
  double beta = 0.05;
  DenseMatrix oracle = neumann_katz(g, beta, 50);
  DenseMatrix s = katz_apply(g, beta, identity(g.n));
  REQUIRE(max_abs_diff(s, oracle) < 1e-10);

  SECTION("transposed apply agrees with the transposed oracle") {
    DenseMatrix st = katz_apply(g, beta, identity(g.n), /*transposed=*/true);
    REQUIRE(max_abs_diff(st, transpose(oracle)) < 1e-10);
  }
}

TEST_CASE("katz apply is linear in its input block") {
  DirectedGraph g = random_digraph(12, 0.25, 3);
  Rng rng(5);
  DenseMatrix x(g.n, 4), y(g.n, 4), xy(g.n, 4);
  for (std::size_t k = 0; k < x.data.size(); ++k) {
    x.data[k] = rng.normal();
    y.data[k] = rng.normal();
    xy.data[k] = x.data[k] + y.data[k];
  }
  DenseMatrix sx = katz_apply(g, 0.04, x);
  DenseMatrix sy = katz_apply(g, 0.04, y);
  DenseMatrix sxy = katz_apply(g, 0.04, xy);
  for (std::size_t k = 0; k < sxy.data.size(); ++k)
    REQUIRE(sxy.data[k] == Catch::Approx(sx.data[k] + sy.data[k]).margin(1e-12));
}

TEST_CASE("katz apply on an empty graph is zero") {
  DirectedGraph g = make_graph(4, {});
  DenseMatrix s = katz_apply(g, 0.2, identity(4));
  for (double v : s.data) REQUIRE(v == 0.0);
}

TEST_CASE("katz apply rejects a diverging series") {
  // 2-cycle has spectral radius 1, so beta = 1.5 makes the series diverge.
  DirectedGraph g = make_graph(2, {{0, 1}, {1, 0}});
  REQUIRE_THROWS_AS(katz_apply(g, 1.5, identity(2)), std::runtime_error);
  REQUIRE_THROWS_AS(katz_apply(g, -0.1, identity(2)), std::invalid_argument);
}

TEST_CASE("full-rank hope factorization reconstructs the proximity matrix") {
  DirectedGraph g = random_digraph(8, 0.35, 21);
  HopeConfig cfg;
  cfg.beta = 0.05;
  cfg.rank = 8;
  HopeEmbedding emb = hope_embed(g, cfg);
  DenseMatrix s = katz_apply(g, cfg.beta, identity(g.n));
  DenseMatrix approx = matmul_trans_b(emb.zs, emb.zt);
  REQUIRE(max_abs_diff(approx, s) < 1e-8);

  SECTION("singular values are non-negative and descending") {
    for (std::size_t k = 0; k < emb.singular_values.size(); ++k) {
      REQUIRE(emb.singular_values[k] >= 0.0);
      if (k > 0) REQUIRE(emb.singular_values[k] <= emb.singular_values[k - 1] + 1e-12);
    }
  }
}

TEST_CASE("hope reconstruction error is monotone in the rank") {
  DirectedGraph g = random_digraph(14, 0.3, 9);
  HopeConfig cfg;
  cfg.beta = 0.04;
  DenseMatrix s = katz_apply(g, cfg.beta, identity(g.n));
  double prev_err = -1.0;
  for (int rank : {2, 4, 8, 14}) {
    cfg.rank = rank;
    HopeEmbedding emb = hope_embed(g, cfg);
    DenseMatrix approx = matmul_trans_b(emb.zs, emb.zt);
    DenseMatrix diff = approx;
    for (std::size_t k = 0; k < diff.data.size(); ++k) diff.data[k] -= s.data[k];
    double err = frobenius_norm(diff);
    if (prev_err >= 0.0) REQUIRE(err <= prev_err + 1e-9);
    prev_err = err;
  }
  REQUIRE(prev_err < 1e-8);  // full rank at the end of the sweep
}

TEST_CASE("hope embeddings are deterministic for a fixed seed") {
  DirectedGraph g = random_digraph(10, 0.3, 2);
  HopeConfig cfg;
  cfg.rank = 4;
  cfg.seed = 77;
  HopeEmbedding a = hope_embed(g, cfg);
  HopeEmbedding b = hope_embed(g, cfg);
  REQUIRE(a.zs.data == b.zs.data);
  REQUIRE(a.zt.data == b.zt.data);
  REQUIRE(a.singular_values == b.singular_values);
}

TEST_CASE("hope scores are probabilities and directed") {
  DirectedGraph g = random_digraph(12, 0.25, 6);
  HopeConfig cfg;
  cfg.rank = 4;
  HopeEmbedding emb = hope_embed(g, cfg);
  int asymmetric = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      double s = emb.score(i, j);
      REQUIRE(s > 0.0);
      REQUIRE(s < 1.0);
      if (i < j && std::abs(s - emb.score(j, i)) > 1e-12) ++asymmetric;
    }
  REQUIRE(asymmetric > 0);
}

TEST_CASE("hope on an empty graph degrades to zero embeddings") {
  DirectedGraph g = make_graph(6, {});
  HopeConfig cfg;
  cfg.rank = 3;
  HopeEmbedding emb = hope_embed(g, cfg);
  for (double v : emb.singular_values) REQUIRE(v == 0.0);
  for (double v : emb.zs.data) REQUIRE(v == 0.0);
  for (double v : emb.zt.data) REQUIRE(v == 0.0);
  REQUIRE(emb.score(0, 1) == 0.5);  // zero logit
}

TEST_CASE("hope validates its configuration") {
  DirectedGraph g = make_graph(5, {{0, 1}});
  HopeConfig cfg;
  cfg.rank = 0;
  REQUIRE_THROWS_AS(hope_embed(g, cfg), std::invalid_argument);
  cfg.rank = 6;
  REQUIRE_THROWS_AS(hope_embed(g, cfg), std::invalid_argument);
}
