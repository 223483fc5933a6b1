#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gravae/graph.hpp"
#include "gravae/kernels.hpp"
#include "gravae/matrix.hpp"
#include "gravae/rng.hpp"

namespace gravae {

namespace detail {

// Y = A X (rows sum over out-neighbors) or A^T X (over in-neighbors).
inline DenseMatrix adjacency_apply(const DirectedGraph& g, const DenseMatrix& x,
                                   bool transposed) {
  check_shape(x.rows == g.n, "adjacency_apply");
  DenseMatrix y(g.n, x.cols);
  for (int i = 0; i < g.n; ++i) {
    double* yi = y.row(i);
    int a = transposed ? g.in_offsets[i] : g.out_offsets[i];
    int b = transposed ? g.in_offsets[i + 1] : g.out_offsets[i + 1];
    const std::vector<int>& nbr = transposed ? g.in_sources : g.out_targets;
    for (int k = a; k < b; ++k) {
      const double* xr = x.row(nbr[k]);
      for (int j = 0; j < x.cols; ++j) yi[j] += xr[j];
    }
  }
  return y;
}

inline double max_abs(const DenseMatrix& m) {
  double v = 0.0;
  for (double x : m.data) v = std::max(v, std::abs(x));
  return v;
}

}  // namespace detail

// Applies the Katz proximity S = (I - beta A)^-1 beta A to a block of
// vectors by accumulating the Neumann series beta A + (beta A)^2 + ...
// Converges iff beta is below 1 over the spectral radius of A.
inline DenseMatrix katz_apply(const DirectedGraph& g, double beta, const DenseMatrix& x,
                              bool transposed = false, double tol = 1e-10,
                              int max_iter = 1000) {
  if (beta <= 0.0) throw std::invalid_argument("katz_apply: beta must be > 0");
  DenseMatrix term = detail::adjacency_apply(g, x, transposed);
  for (double& v : term.data) v *= beta;
  DenseMatrix y = term;
  for (int it = 0; it < max_iter; ++it) {
    double scale = std::max(1.0, detail::max_abs(y));
    if (detail::max_abs(term) <= tol * scale) return y;
    term = detail::adjacency_apply(g, term, transposed);
    for (double& v : term.data) v *= beta;
    for (std::size_t k = 0; k < y.data.size(); ++k) y.data[k] += term.data[k];
  }
  throw std::runtime_error("katz_apply: series did not converge; beta too large?");
}

// ---------------------------------------------------------------------------
// HOPE: source/target embedding from a rank-truncated SVD of the Katz
// proximity matrix, computed matrix-free by subspace iteration on S S^T.
// ---------------------------------------------------------------------------

struct HopeConfig {
  double beta = 0.01;
  int rank = 16;
  int oversample = 8;    // extra subspace columns for convergence headroom
  double tol = 1e-10;    // relative change of Ritz values between sweeps
  int max_iter = 200;
  std::uint64_t seed = 0;
};

struct HopeEmbedding {
  DenseMatrix zs, zt;  // n x rank source and target coordinates
  std::vector<double> singular_values;

  double score(int i, int j) const {
    return sigmoid(dot(zs.row(i), zt.row(j), zs.cols));
  }
};

namespace detail {

// Modified Gram-Schmidt with one re-orthogonalization pass. Columns that
// vanish (rank-deficient input) are replaced by canonical basis vectors so
// the output always has orthonormal columns.
inline void orthonormalize(DenseMatrix& q) {
  int n = q.rows, r = q.cols;
  for (int c = 0; c < r; ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int p = 0; p < c; ++p) {
        double proj = 0.0;
        for (int i = 0; i < n; ++i) proj += q.at(i, p) * q.at(i, c);
        for (int i = 0; i < n; ++i) q.at(i, c) -= proj * q.at(i, p);
      }
    }
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += q.at(i, c) * q.at(i, c);
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      for (int i = 0; i < n; ++i) q.at(i, c) = 0.0;
      q.at(c % n, c) = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (int p = 0; p < c; ++p) {
          double proj = 0.0;
          for (int i = 0; i < n; ++i) proj += q.at(i, p) * q.at(i, c);
          for (int i = 0; i < n; ++i) q.at(i, c) -= proj * q.at(i, p);
        }
      }
      norm = 0.0;
      for (int i = 0; i < n; ++i) norm += q.at(i, c) * q.at(i, c);
      norm = std::sqrt(norm);
      if (norm < 1e-12) continue;  // pathological; leave the zero column
    }
    for (int i = 0; i < n; ++i) q.at(i, c) /= norm;
  }
}

}  // namespace detail

inline HopeEmbedding hope_embed(const DirectedGraph& g, const HopeConfig& cfg) {
  if (cfg.rank <= 0) throw std::invalid_argument("hope_embed: rank must be > 0");
  if (cfg.rank > g.n) throw std::invalid_argument("hope_embed: rank exceeds node count");
  const int n = g.n;
  const int r = std::min(cfg.rank + cfg.oversample, n);

  Rng rng(cfg.seed);
  DenseMatrix q(n, r);
  for (double& v : q.data) v = rng.normal();
  detail::orthonormalize(q);

  DenseMatrix b;  // S^T Q from the last completed sweep
  SymmetricEig ritz;
  std::vector<double> prev;
  for (int it = 0; it < cfg.max_iter; ++it) {
    b = katz_apply(g, cfg.beta, q, /*transposed=*/true);
    ritz = jacobi_eigh(matmul_trans_a(b, b));  // Q^T S S^T Q, r x r
    bool converged = !prev.empty();
    if (converged) {
      for (int k = 0; k < cfg.rank; ++k) {
        double denom = std::max({1e-30, std::abs(prev[k]), std::abs(ritz.values[k])});
        if (std::abs(ritz.values[k] - prev[k]) / denom > cfg.tol) {
          converged = false;
          break;
        }
      }
    }
    if (converged) break;
    prev = ritz.values;
    DenseMatrix y = katz_apply(g, cfg.beta, b, /*transposed=*/false);
    q = y;
    detail::orthonormalize(q);
  }

  HopeEmbedding emb;
  emb.zs = DenseMatrix(n, cfg.rank);
  emb.zt = DenseMatrix(n, cfg.rank);
  emb.singular_values.resize(cfg.rank);
  // Ritz extraction: U = Q W, V = B W / sigma, embeddings scaled by sqrt(sigma)
  for (int k = 0; k < cfg.rank; ++k) {
    double sigma = std::sqrt(std::max(0.0, ritz.values[k]));
    emb.singular_values[k] = sigma;
    double root = std::sqrt(sigma);
    for (int i = 0; i < n; ++i) {
      double u = 0.0, v = 0.0;
      for (int c = 0; c < r; ++c) {
        u += q.at(i, c) * ritz.vectors.at(c, k);
        v += b.at(i, c) * ritz.vectors.at(c, k);
      }
      emb.zs.at(i, k) = u * root;
      emb.zt.at(i, k) = sigma > 1e-300 ? (v / sigma) * root : 0.0;
    }
  }
  return emb;
}

}  // namespace gravae
