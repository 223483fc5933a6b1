#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gravae/matrix.hpp"
#include "gravae/rng.hpp"

using namespace gravae;

namespace {

DenseMatrix random_matrix(int r, int c, Rng& rng) {
  DenseMatrix m(r, c);
  for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

// Textbook triple-loop product used as the oracle for the tuned variants.
DenseMatrix matmul_oracle(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(k, j);
      c.at(i, j) = s;
    }
  return c;
}

}  // namespace

TEST_CASE("matmul variants agree with the naive oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    DenseMatrix a = random_matrix(7, 5, rng);
    DenseMatrix b = random_matrix(5, 9, rng);
    REQUIRE(max_abs_diff(matmul(a, b), matmul_oracle(a, b)) < 1e-12);
    REQUIRE(max_abs_diff(matmul_trans_a(transpose(a), b),
                         matmul_oracle(a, b)) < 1e-12);
    REQUIRE(max_abs_diff(matmul_trans_b(a, transpose(b)),
                         matmul_oracle(a, b)) < 1e-12);
  }
}

TEST_CASE("identity is a matmul unit") {
  Rng rng(3);
  DenseMatrix a = random_matrix(6, 4, rng);
  REQUIRE(max_abs_diff(matmul(identity(6), a), a) == 0.0);
  REQUIRE(max_abs_diff(matmul(a, identity(4)), a) == 0.0);
}

TEST_CASE("transpose is an involution") {
  Rng rng(4);
  DenseMatrix a = random_matrix(5, 8, rng);
  REQUIRE(max_abs_diff(transpose(transpose(a)), a) == 0.0);
}

TEST_CASE("shape mismatches throw") {
  DenseMatrix a(3, 4), b(5, 6);
  REQUIRE_THROWS(matmul(a, b));
  REQUIRE_THROWS(matmul_trans_a(a, b));
  REQUIRE_THROWS(matmul_trans_b(a, b));
}

TEST_CASE("frobenius norm of a known matrix") {
  DenseMatrix a(2, 2);
  a.at(0, 0) = 3.0;
  a.at(1, 1) = 4.0;
  REQUIRE(std::abs(frobenius_norm(a) - 5.0) < 1e-15);
}
