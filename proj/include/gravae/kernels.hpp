#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gravae/matrix.hpp"

namespace gravae {

// Numerically stable logistic function; never overflows.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow; for large x returns x + log1p(e^-x).
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline DenseMatrix relu(const DenseMatrix& x) {
  DenseMatrix y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

// dX = dY where the pre-activation was positive, else 0.
inline DenseMatrix relu_backward(const DenseMatrix& pre, const DenseMatrix& dy) {
  check_shape(pre.same_shape(dy), "relu_backward");
  DenseMatrix dx = dy;
  for (std::size_t i = 0; i < dx.data.size(); ++i)
    if (pre.data[i] <= 0.0) dx.data[i] = 0.0;
  return dx;
}

// All pairwise squared Euclidean distances between rows of z, via the
// norms-and-inner-products identity. Exactly symmetric (upper triangle is
// mirrored), exactly zero on the diagonal, clamped at 0 against roundoff.
inline DenseMatrix pairwise_sq_dist(const DenseMatrix& z) {
  int n = z.rows;
  std::vector<double> nrm(n);
  for (int i = 0; i < n; ++i) nrm[i] = dot(z.row(i), z.row(i), z.cols);
  DenseMatrix d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double v = nrm[i] + nrm[j] - 2.0 * dot(z.row(i), z.row(j), z.cols);
      v = std::max(v, 0.0);
      d.at(i, j) = v;
      d.at(j, i) = v;
    }
  }
  return d;
}

// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
// Eigenvalues sorted descending; columns of vectors match that order.
struct SymmetricEig {
  std::vector<double> values;
  DenseMatrix vectors;  // n x n, column k is the eigenvector of values[k]
};

inline SymmetricEig jacobi_eigh(DenseMatrix a) {
  if (a.rows != a.cols) throw std::invalid_argument("jacobi_eigh: not square");
  int n = a.rows;
  DenseMatrix v = identity(n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a.at(i, j)));
  if (scale == 0.0) scale = 1.0;
  const double tol = 1e-14 * scale;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a.at(p, q)));
    if (off <= tol) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a.at(p, q);
        if (std::abs(apq) <= tol * 1e-2) continue;
        double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return a.at(x, x) > a.at(y, y); });
  SymmetricEig out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a.at(order[k], order[k]);
    for (int i = 0; i < n; ++i) out.vectors.at(i, k) = v.at(i, order[k]);
  }
  return out;
}

}  // namespace gravae
