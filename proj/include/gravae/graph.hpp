#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace gravae {

using Edge = std::pair<int, int>;

struct PairHash {
  std::size_t operator()(const Edge& e) const {
    return std::hash<long long>()((static_cast<long long>(e.first) << 32) ^
                                  static_cast<unsigned>(e.second));
  }
};

// Simple directed graph over integer node ids [0, n). Edges are unique,
// kept in first-appearance order, with CSR indexes in both directions for
// O(log deg) membership tests and neighbor iteration. Self loops are not
// stored. Weights are optional and empty means unweighted.
struct DirectedGraph {
  int n = 0;
  std::vector<Edge> edges;
  std::vector<std::string> labels;   // empty = use decimal ids
  std::vector<double> weights;       // empty = all 1

  std::vector<int> out_offsets, out_targets;  // sorted targets per source
  std::vector<int> in_offsets, in_sources;    // sorted sources per target

  void build_index() {
    out_offsets.assign(n + 1, 0);
    in_offsets.assign(n + 1, 0);
    for (const Edge& e : edges) {
      ++out_offsets[e.first + 1];
      ++in_offsets[e.second + 1];
    }
    for (int i = 0; i < n; ++i) {
      out_offsets[i + 1] += out_offsets[i];
      in_offsets[i + 1] += in_offsets[i];
    }
    out_targets.resize(edges.size());
    in_sources.resize(edges.size());
    std::vector<int> po(out_offsets.begin(), out_offsets.end() - 1);
    std::vector<int> pi(in_offsets.begin(), in_offsets.end() - 1);
    for (const Edge& e : edges) {
      out_targets[po[e.first]++] = e.second;
      in_sources[pi[e.second]++] = e.first;
    }
    for (int i = 0; i < n; ++i) {
      std::sort(out_targets.begin() + out_offsets[i],
                out_targets.begin() + out_offsets[i + 1]);
      std::sort(in_sources.begin() + in_offsets[i],
                in_sources.begin() + in_offsets[i + 1]);
    }
  }

  std::size_t edge_count() const { return edges.size(); }

  bool has_edge(int src, int dst) const {
    auto lo = out_targets.begin() + out_offsets[src];
    auto hi = out_targets.begin() + out_offsets[src + 1];
    return std::binary_search(lo, hi, dst);
  }

  int out_degree(int v) const { return out_offsets[v + 1] - out_offsets[v]; }
  int in_degree(int v) const { return in_offsets[v + 1] - in_offsets[v]; }

  std::string label(int v) const {
    return labels.empty() ? std::to_string(v) : labels[v];
  }
};

inline DirectedGraph make_graph(int n, std::vector<Edge> edges,
                                std::vector<std::string> labels = {}) {
  DirectedGraph g;
  g.n = n;
  g.labels = std::move(labels);
  if (!g.labels.empty() && static_cast<int>(g.labels.size()) != n)
    throw std::invalid_argument("make_graph: label count != n");
  std::unordered_set<Edge, PairHash> seen;
  seen.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.first < 0 || e.first >= n || e.second < 0 || e.second >= n)
      throw std::out_of_range("make_graph: edge endpoint out of range");
    if (e.first == e.second) continue;
    if (seen.insert(e).second) g.edges.push_back(e);
  }
  g.build_index();
  return g;
}

enum class EdgeListFormat { whitespace, csv };

struct LoadReport {
  std::size_t raw_lines = 0;
  std::size_t parsed_edges = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

// Reads "<src> <dst>" per line (or "src,dst" for csv). '#' starts a comment,
// blank lines are skipped, node labels are arbitrary tokens indexed in first
// appearance order. Self loops and duplicate edges are dropped and counted.
inline DirectedGraph load_edge_list(const std::string& path,
                                    EdgeListFormat format = EdgeListFormat::whitespace,
                                    LoadReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  LoadReport rep;
  std::unordered_map<std::string, int> index;
  std::vector<std::string> labels;
  std::vector<Edge> raw_edges;
  auto node_id = [&](const std::string& tok) {
    auto it = index.find(tok);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(labels.size());
    index.emplace(tok, id);
    labels.push_back(tok);
    return id;
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    ++rep.raw_lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (format == EdgeListFormat::csv)
      std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a)) continue;  // blank or comment-only
    if (!(ss >> b) || (ss >> extra))
      throw std::runtime_error("malformed edge list line " +
                               std::to_string(lineno) + " in " + path);
    ++rep.parsed_edges;
    int src = node_id(a);  // sequenced: source label gets the lower fresh id
    int dst = node_id(b);
    raw_edges.emplace_back(src, dst);
  }
  DirectedGraph g;
  g.n = static_cast<int>(labels.size());
  g.labels = std::move(labels);
  std::unordered_set<Edge, PairHash> seen;
  seen.reserve(raw_edges.size() * 2);
  for (const Edge& e : raw_edges) {
    if (e.first == e.second) {
      ++rep.self_loops_dropped;
      continue;
    }
    if (!seen.insert(e).second) {
      ++rep.duplicates_dropped;
      continue;
    }
    g.edges.push_back(e);
  }
  g.build_index();
  if (report) *report = rep;
  return g;
}

inline void write_edge_list(const DirectedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list: " + path);
  for (const Edge& e : g.edges)
    out << g.label(e.first) << ' ' << g.label(e.second) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Fraction of edges whose reverse is also present. 0 for an edgeless graph.
inline double reciprocity(const DirectedGraph& g) {
  if (g.edges.empty()) return 0.0;
  std::size_t recip = 0;
  for (const Edge& e : g.edges)
    if (g.has_edge(e.second, e.first)) ++recip;
  return static_cast<double>(recip) / static_cast<double>(g.edges.size());
}

// Node pairs (i < j) connected in both directions.
inline std::vector<Edge> reciprocal_pairs(const DirectedGraph& g) {
  std::vector<Edge> out;
  for (const Edge& e : g.edges)
    if (e.first < e.second && g.has_edge(e.second, e.first))
      out.push_back(e);
  return out;
}

// Edges whose reverse is absent.
inline std::vector<Edge> unidirectional_edges(const DirectedGraph& g) {
  std::vector<Edge> out;
  for (const Edge& e : g.edges)
    if (!g.has_edge(e.second, e.first)) out.push_back(e);
  return out;
}

}  // namespace gravae
