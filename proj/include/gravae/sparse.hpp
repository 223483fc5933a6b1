#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "gravae/graph.hpp"
#include "gravae/matrix.hpp"

namespace gravae {

// Sparse row-compressed matrix used for the message-passing operator.
struct SparseRowMatrix {
  int rows = 0, cols = 0;
  std::vector<int> offsets;  // rows + 1
  std::vector<int> col_index;
  std::vector<double> values;
};

// Out-degree normalized adjacency with self loops: row i holds weight
// 1 / (out_degree(i) + 1) on column i and on each out-neighbor of i.
// Every row sums to 1 up to roundoff.
inline SparseRowMatrix out_degree_normalize(const DirectedGraph& g) {
  SparseRowMatrix m;
  m.rows = m.cols = g.n;
  m.offsets.assign(g.n + 1, 0);
  for (int i = 0; i < g.n; ++i)
    m.offsets[i + 1] = m.offsets[i] + g.out_degree(i) + 1;
  m.col_index.resize(m.offsets[g.n]);
  m.values.resize(m.offsets[g.n]);
  for (int i = 0; i < g.n; ++i) {
    double w = 1.0 / (g.out_degree(i) + 1);
    int pos = m.offsets[i];
    int a = g.out_offsets[i], b = g.out_offsets[i + 1];
    bool placed_diag = false;
    for (int t = a; t < b; ++t) {
      int j = g.out_targets[t];
      if (!placed_diag && i < j) {
        m.col_index[pos] = i;
        m.values[pos++] = w;
        placed_diag = true;
      }
      m.col_index[pos] = j;
      m.values[pos++] = w;
    }
    if (!placed_diag) {
      m.col_index[pos] = i;
      m.values[pos++] = w;
    }
  }
  return m;
}

inline SparseRowMatrix sparse_transpose(const SparseRowMatrix& a) {
  SparseRowMatrix t;
  t.rows = a.cols;
  t.cols = a.rows;
  t.offsets.assign(t.rows + 1, 0);
  for (int j : a.col_index) ++t.offsets[j + 1];
  for (int i = 0; i < t.rows; ++i) t.offsets[i + 1] += t.offsets[i];
  t.col_index.resize(a.col_index.size());
  t.values.resize(a.values.size());
  std::vector<int> pos(t.offsets.begin(), t.offsets.end() - 1);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = a.offsets[i]; k < a.offsets[i + 1]; ++k) {
      int j = a.col_index[k];
      t.col_index[pos[j]] = i;
      t.values[pos[j]] = a.values[k];
      ++pos[j];
    }
  }
  return t;
}

// Y = S * X, rows independent, columns accumulated in stored order.
inline DenseMatrix spmm(const SparseRowMatrix& s, const DenseMatrix& x) {
  check_shape(s.cols == x.rows, "spmm");
  DenseMatrix y(s.rows, x.cols);
  for (int i = 0; i < s.rows; ++i) {
    double* yi = y.row(i);
    for (int k = s.offsets[i]; k < s.offsets[i + 1]; ++k) {
      double v = s.values[k];
      const double* xr = x.row(s.col_index[k]);
      for (int j = 0; j < x.cols; ++j) yi[j] += v * xr[j];
    }
  }
  return y;
}

inline DenseMatrix sparse_to_dense(const SparseRowMatrix& s) {
  DenseMatrix d(s.rows, s.cols);
  for (int i = 0; i < s.rows; ++i)
    for (int k = s.offsets[i]; k < s.offsets[i + 1]; ++k)
      d.at(i, s.col_index[k]) += s.values[k];
  return d;
}

}  // namespace gravae
