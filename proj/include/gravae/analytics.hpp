#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gravae/evaluation.hpp"
#include "gravae/graph.hpp"
#include "gravae/runtime.hpp"
#include "gravae/splits.hpp"
#include "gravae/training.hpp"

namespace gravae {

inline std::vector<double> out_degrees(const DirectedGraph& g) {
  std::vector<double> d(g.n);
  for (int v = 0; v < g.n; ++v) d[v] = g.out_degree(v);
  return d;
}

inline std::vector<double> in_degrees(const DirectedGraph& g) {
  std::vector<double> d(g.n);
  for (int v = 0; v < g.n; ++v) d[v] = g.in_degree(v);
  return d;
}

// Directed unweighted betweenness (Brandes). Sources are processed in
// parallel; per-chunk partial sums are combined in chunk order so the result
// does not depend on the worker count.
inline std::vector<double> betweenness_centrality(const DirectedGraph& g) {
  const int n = g.n;
  std::vector<double> total(n, 0.0);
  if (n == 0) return total;
  std::size_t chunks = std::min<std::size_t>(n, kParallelChunks);
  std::vector<std::vector<double>> partial(chunks);

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi,
                                                std::size_t chunk) {
    std::vector<double>& acc = partial[chunk];
    acc.assign(n, 0.0);
    std::vector<int> dist(n), order;
    std::vector<double> sigma(n), delta(n);
    order.reserve(n);
    std::deque<int> queue;
    for (std::size_t su = lo; su < hi; ++su) {
      int s = static_cast<int>(su);
      std::fill(dist.begin(), dist.end(), -1);
      std::fill(sigma.begin(), sigma.end(), 0.0);
      std::fill(delta.begin(), delta.end(), 0.0);
      order.clear();
      dist[s] = 0;
      sigma[s] = 1.0;
      queue.push_back(s);
      while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        order.push_back(v);
        for (int k = g.out_offsets[v]; k < g.out_offsets[v + 1]; ++k) {
          int w = g.out_targets[k];
          if (dist[w] < 0) {
            dist[w] = dist[v] + 1;
            queue.push_back(w);
          }
          if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
        }
      }
      // Dependency accumulation: v precedes w exactly when the edge v->w
      // sits on a shortest path, i.e. dist[w] == dist[v] + 1.
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int v = *it;
        for (int k = g.out_offsets[v]; k < g.out_offsets[v + 1]; ++k) {
          int w = g.out_targets[k];
          if (dist[w] == dist[v] + 1)
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
        if (v != s) acc[v] += delta[v];
      }
    }
  });

  for (std::size_t c = 0; c < chunks; ++c) {
    if (partial[c].empty()) continue;
    for (int v = 0; v < n; ++v) total[v] += partial[c][v];
  }
  return total;
}

// Random-walk PageRank with uniform teleport; mass at dangling nodes is
// redistributed uniformly each step, so the vector keeps summing to one.
inline std::vector<double> pagerank(const DirectedGraph& g, double damping = 0.85,
                                    double tol = 1e-10, int max_iter = 1000) {
  if (damping < 0.0 || damping >= 1.0)
    throw std::invalid_argument("pagerank: damping must be in [0, 1)");
  const int n = g.n;
  if (n == 0) return {};
  std::vector<double> inv_out(n, 0.0);
  for (int v = 0; v < n; ++v)
    if (g.out_degree(v) > 0) inv_out[v] = 1.0 / g.out_degree(v);
  std::vector<double> x(n, 1.0 / n), next(n);
  for (int it = 0; it < max_iter; ++it) {
    double dangling = 0.0;
    for (int v = 0; v < n; ++v)
      if (inv_out[v] == 0.0) dangling += x[v];
    double base = damping * dangling / n + (1.0 - damping) / n;
    for (int v = 0; v < n; ++v) {
      double in_mass = 0.0;
      for (int k = g.in_offsets[v]; k < g.in_offsets[v + 1]; ++k) {
        int u = g.in_sources[k];
        in_mass += x[u] * inv_out[u];
      }
      next[v] = damping * in_mass + base;
    }
    double diff = 0.0;
    for (int v = 0; v < n; ++v) diff += std::abs(next[v] - x[v]);
    x.swap(next);
    if (diff < tol) return x;
  }
  throw std::runtime_error("pagerank: did not converge");
}

// Largest adjacency eigenvalue estimate by power iteration; 0 for graphs
// whose walks die out (nilpotent adjacency).
inline double dominant_eigenvalue_estimate(const DirectedGraph& g, int iters = 100) {
  const int n = g.n;
  if (n == 0) return 0.0;
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), w(n);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = g.out_offsets[i]; k < g.out_offsets[i + 1]; ++k)
        s += v[g.out_targets[k]];
      w[i] = s;
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-30) return 0.0;
    lambda = norm;
    for (int i = 0; i < n; ++i) v[i] = w[i] / norm;
  }
  return lambda;
}

// Katz influence over outgoing edges: c_i = alpha * sum_{j in out(i)} c_j + beta.
// alpha <= 0 selects 0.9 / max(lambda_hat, 1) from the power-iteration estimate.
inline std::vector<double> katz_centrality(const DirectedGraph& g, double alpha = -1.0,
                                           double beta = 1.0, double tol = 1e-10,
                                           int max_iter = 10000) {
  const int n = g.n;
  if (n == 0) return {};
  if (alpha <= 0.0) alpha = 0.9 / std::max(dominant_eigenvalue_estimate(g), 1.0);
  std::vector<double> c(n, 0.0), next(n);
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = g.out_offsets[i]; k < g.out_offsets[i + 1]; ++k)
        s += c[g.out_targets[k]];
      next[i] = alpha * s + beta;
    }
    double diff = 0.0, magnitude = 0.0;
    for (int i = 0; i < n; ++i) {
      diff = std::max(diff, std::abs(next[i] - c[i]));
      magnitude = std::max(magnitude, std::abs(next[i]));
    }
    if (magnitude > 1e12)
      throw std::runtime_error("katz_centrality: diverged; alpha too large");
    c.swap(next);
    if (diff < tol) return c;
  }
  throw std::runtime_error("katz_centrality: did not converge");
}

// Sample correlation; 0 when either input has no variance.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: size mismatch");
  std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Lambda sweep: retrain the same model over a grid of distance coefficients
// and aggregate test metrics across seeds.
// ---------------------------------------------------------------------------

struct SweepPoint {
  double lambda = 0.0;
  std::vector<MetricReport> reports;  // one per seed
  Aggregate aggregate;
};

inline std::vector<SweepPoint> lambda_sweep(const DirectedGraph& g, SplitTask task,
                                            const std::vector<double>& lambdas,
                                            const std::vector<std::uint64_t>& seeds,
                                            TrainConfig base) {
  if (lambdas.empty()) throw std::invalid_argument("lambda_sweep: no lambdas");
  if (seeds.empty()) throw std::invalid_argument("lambda_sweep: no seeds");
  std::vector<SweepPoint> points;
  for (double lam : lambdas) {
    SweepPoint p;
    p.lambda = lam;
    TrainConfig cfg = base;
    cfg.lambda = lam;
    for (std::uint64_t seed : seeds) {
      cfg.seed = seed;
      EdgeSplit split = make_split(g, task, seed);
      TrainResult tr = train(split.train, cfg);
      MetricReport r = evaluate_split(tr.embedding, cfg.decoder(), split);
      r.model = model_name(cfg.model);
      p.reports.push_back(r);
    }
    p.aggregate = aggregate_reports(p.reports);
    points.push_back(std::move(p));
  }
  return points;
}

inline void write_sweep_csv(const std::vector<SweepPoint>& points,
                            const std::string& model, const std::string& task,
                            const std::string& path) {
  if (points.empty()) throw std::invalid_argument("write_sweep_csv: no points");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sweep csv: " + path);
  out << "lambda,model,task,runs,auc_mean,auc_se,ap_mean,ap_se\n";
  char buf[64];
  for (const SweepPoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%g", p.lambda);
    out << buf << ',' << model << ',' << task << ',' << p.aggregate.runs;
    for (double v : {p.aggregate.auc_mean * 100.0, p.aggregate.auc_se * 100.0,
                     p.aggregate.ap_mean * 100.0, p.aggregate.ap_se * 100.0}) {
      std::snprintf(buf, sizeof(buf), "%.2f", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Embedding export
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  q += '"';
  return q;
}

}  // namespace detail

// One row per node: label, mass logit when present, then coordinates.
inline void export_embedding_csv(const DirectedGraph& g, const Embedding& emb,
                                 const std::string& path) {
  if (emb.n() != g.n)
    throw std::invalid_argument("export_embedding_csv: node count mismatch");
  bool with_mass = !emb.mass.empty();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write embedding csv: " + path);
  out << "node_label";
  if (with_mass) out << ",mass";
  for (int k = 0; k < emb.dim(); ++k) out << ",z_" << (k + 1);
  out << '\n';
  char buf[64];
  for (int v = 0; v < g.n; ++v) {
    out << detail::csv_field(g.label(v));
    if (with_mass) {
      std::snprintf(buf, sizeof(buf), "%.17g", emb.mass[v]);
      out << ',' << buf;
    }
    for (int k = 0; k < emb.dim(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", emb.z.at(v, k));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gravae
