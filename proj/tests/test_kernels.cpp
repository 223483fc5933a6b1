#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gravae/kernels.hpp"
#include "gravae/matrix.hpp"
#include "gravae/rng.hpp"

using namespace gravae;

TEST_CASE("sigmoid hits known points and never overflows") {
  REQUIRE(sigmoid(0.0) == 0.5);
  REQUIRE(std::abs(sigmoid(2.0) - 1.0 / (1.0 + std::exp(-2.0))) < 1e-15);
  REQUIRE(sigmoid(1000.0) == 1.0);
  REQUIRE(sigmoid(-1000.0) >= 0.0);
  REQUIRE(sigmoid(-1000.0) < 1e-300);
  for (double x : {-30.0, -3.0, -0.5, 0.7, 4.0, 25.0})
    REQUIRE(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) < 1e-15);
}

TEST_CASE("softplus matches log(1+e^x) and stays finite for large x") {
  for (double x : {-20.0, -1.0, 0.0, 1.0, 15.0})
    REQUIRE(std::abs(softplus(x) - std::log1p(std::exp(x))) < 1e-13);
  REQUIRE(softplus(0.0) == std::log(2.0));
  REQUIRE(std::isfinite(softplus(800.0)));
  REQUIRE(std::abs(softplus(800.0) - 800.0) < 1e-12);
  // derivative of softplus is the sigmoid
  double h = 1e-6;
  for (double x : {-2.0, 0.3, 5.0}) {
    double fd = (softplus(x + h) - softplus(x - h)) / (2 * h);
    REQUIRE(std::abs(fd - sigmoid(x)) < 1e-9);
  }
}

TEST_CASE("relu and its backward mask") {
  DenseMatrix x(2, 2);
  x.at(0, 0) = -1.0;
  x.at(0, 1) = 2.0;
  x.at(1, 0) = 0.0;
  x.at(1, 1) = -3.5;
  DenseMatrix y = relu(x);
  REQUIRE(y.at(0, 0) == 0.0);
  REQUIRE(y.at(0, 1) == 2.0);
  REQUIRE(y.at(1, 0) == 0.0);
  REQUIRE(y.at(1, 1) == 0.0);
  DenseMatrix dy(2, 2, 1.0);
  DenseMatrix dx = relu_backward(x, dy);
  REQUIRE(dx.at(0, 0) == 0.0);
  REQUIRE(dx.at(0, 1) == 1.0);
  REQUIRE(dx.at(1, 0) == 0.0);  // gradient at exactly 0 is taken as 0
  REQUIRE(dx.at(1, 1) == 0.0);
}

TEST_CASE("pairwise squared distances match the naive double loop") {
  Rng rng(21);
  DenseMatrix z(8, 3);
  for (double& v : z.data) v = rng.uniform(-2.0, 2.0);
  DenseMatrix d = pairwise_sq_dist(z);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) {
        double diff = z.at(i, k) - z.at(j, k);
        s += diff * diff;
      }
      REQUIRE(std::abs(d.at(i, j) - s) < 1e-12);
    }
  }
}

TEST_CASE("pairwise distances are exactly symmetric, nonnegative, zero diagonal") {
  Rng rng(22);
  DenseMatrix z(12, 5);
  for (double& v : z.data) v = rng.normal();
  DenseMatrix d = pairwise_sq_dist(z);
  for (int i = 0; i < 12; ++i) {
    REQUIRE(d.at(i, i) == 0.0);
    for (int j = 0; j < 12; ++j) {
      REQUIRE(d.at(i, j) == d.at(j, i));
      REQUIRE(d.at(i, j) >= 0.0);
    }
  }
}

TEST_CASE("jacobi eigendecomposition reconstructs a random symmetric matrix") {
  Rng rng(31);
  int n = 10;
  DenseMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = rng.uniform(-1.0, 1.0);
      a.at(i, j) = v;
      a.at(j, i) = v;
    }
  SymmetricEig e = jacobi_eigh(a);
  // descending order
  for (int k = 1; k < n; ++k) REQUIRE(e.values[k - 1] >= e.values[k]);
  // V diag(w) V^T == A
  DenseMatrix vw = e.vectors;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) vw.at(i, k) *= e.values[k];
  REQUIRE(max_abs_diff(matmul_trans_b(vw, e.vectors), a) < 1e-10);
  // orthonormal columns
  REQUIRE(max_abs_diff(matmul_trans_a(e.vectors, e.vectors), identity(n)) < 1e-10);
}

TEST_CASE("jacobi on a diagonal matrix returns it unchanged") {
  DenseMatrix a(3, 3);
  a.at(0, 0) = -1.0;
  a.at(1, 1) = 5.0;
  a.at(2, 2) = 2.0;
  SymmetricEig e = jacobi_eigh(a);
  REQUIRE(e.values[0] == 5.0);
  REQUIRE(e.values[1] == 2.0);
  REQUIRE(e.values[2] == -1.0);
}
