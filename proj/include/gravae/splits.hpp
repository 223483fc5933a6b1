#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "gravae/graph.hpp"
#include "gravae/rng.hpp"

namespace gravae {

// Three evaluation protocols for directed link prediction.
//
//   general          remove 5% of edges for validation and 10% for test;
//                    negatives are uniformly sampled ordered non-edges.
//   biased_negatives positives are unidirectional edges, each paired with
//                    its (absent) reverse as the negative. Symmetric scorers
//                    cannot beat chance here.
//   bidirectionality one direction of every reciprocal pair is hidden and
//                    must be told apart from reverses of unidirectional
//                    edges; the training graph has reciprocity exactly 0.
enum class SplitTask { general, biased_negatives, bidirectionality };

inline std::string task_name(SplitTask t) {
  switch (t) {
    case SplitTask::general: return "general";
    case SplitTask::biased_negatives: return "biased_negatives";
    case SplitTask::bidirectionality: return "bidirectionality";
  }
  throw std::logic_error("task_name: bad task");
}

inline SplitTask task_from_name(const std::string& s) {
  if (s == "general") return SplitTask::general;
  if (s == "biased_negatives") return SplitTask::biased_negatives;
  if (s == "bidirectionality") return SplitTask::bidirectionality;
  throw std::invalid_argument("unknown split task: " + s);
}

struct EdgeSplit {
  SplitTask task = SplitTask::general;
  std::uint64_t seed = 0;
  DirectedGraph train;  // same node set and labels as the source graph
  std::vector<Edge> val_pos, val_neg, test_pos, test_neg;
};

namespace detail {

inline DirectedGraph subgraph_without(const DirectedGraph& g,
                                      const std::unordered_set<Edge, PairHash>& removed) {
  DirectedGraph t;
  t.n = g.n;
  t.labels = g.labels;
  t.edges.reserve(g.edge_count() - removed.size());
  for (const Edge& e : g.edges)
    if (!removed.count(e)) t.edges.push_back(e);
  t.build_index();
  return t;
}

// Distinct ordered non-edges of g, no self pairs, shared pool across calls
// via `taken`. Throws if the graph has too few non-edges or sampling stalls.
inline std::vector<Edge> sample_negatives(const DirectedGraph& g, std::size_t count,
                                          std::unordered_set<Edge, PairHash>& taken,
                                          Rng& rng) {
  std::size_t ordered_pairs = static_cast<std::size_t>(g.n) * (g.n - 1);
  if (g.edge_count() + taken.size() + count > ordered_pairs)
    throw std::runtime_error("sample_negatives: not enough non-edges");
  std::vector<Edge> out;
  out.reserve(count);
  std::size_t attempts = 0, cap = 1000 * count + 1000;
  while (out.size() < count) {
    if (++attempts > cap)
      throw std::runtime_error("sample_negatives: rejection sampling stalled");
    int i = static_cast<int>(rng.uniform_int(g.n));
    int j = static_cast<int>(rng.uniform_int(g.n));
    if (i == j || g.has_edge(i, j)) continue;
    Edge e{i, j};
    if (!taken.insert(e).second) continue;
    out.push_back(e);
  }
  return out;
}

}  // namespace detail

inline EdgeSplit make_split(const DirectedGraph& g, SplitTask task, std::uint64_t seed) {
  if (g.n < 2) throw std::invalid_argument("make_split: graph too small");
  EdgeSplit s;
  s.task = task;
  s.seed = seed;
  Rng rng = Rng(seed).fork(static_cast<std::uint64_t>(task));
  const std::size_t m = g.edge_count();

  if (task == SplitTask::general) {
    std::size_t n_val = m / 20, n_test = m / 10;  // floor(0.05 m), floor(0.10 m)
    std::vector<std::size_t> order(m);
    for (std::size_t k = 0; k < m; ++k) order[k] = k;
    rng.shuffle(order);
    std::unordered_set<Edge, PairHash> removed;
    for (std::size_t k = 0; k < n_val; ++k) s.val_pos.push_back(g.edges[order[k]]);
    for (std::size_t k = n_val; k < n_val + n_test; ++k)
      s.test_pos.push_back(g.edges[order[k]]);
    removed.insert(s.val_pos.begin(), s.val_pos.end());
    removed.insert(s.test_pos.begin(), s.test_pos.end());
    s.train = detail::subgraph_without(g, removed);
    std::unordered_set<Edge, PairHash> taken;
    s.val_neg = detail::sample_negatives(g, n_val, taken, rng);
    s.test_neg = detail::sample_negatives(g, n_test, taken, rng);
    return s;
  }

  if (task == SplitTask::biased_negatives) {
    std::vector<Edge> uni = unidirectional_edges(g);
    std::size_t n_val = m / 20, n_test = m / 10;
    if (uni.size() < n_val + n_test)
      throw std::runtime_error(
          "biased_negatives split needs at least " + std::to_string(n_val + n_test) +
          " unidirectional edges, graph has " + std::to_string(uni.size()));
    rng.shuffle(uni);
    s.val_pos.assign(uni.begin(), uni.begin() + n_val);
    s.test_pos.assign(uni.begin() + n_val, uni.begin() + n_val + n_test);
    for (const Edge& e : s.val_pos) s.val_neg.emplace_back(e.second, e.first);
    for (const Edge& e : s.test_pos) s.test_neg.emplace_back(e.second, e.first);
    std::unordered_set<Edge, PairHash> removed;
    removed.insert(s.val_pos.begin(), s.val_pos.end());
    removed.insert(s.test_pos.begin(), s.test_pos.end());
    s.train = detail::subgraph_without(g, removed);
    return s;
  }

  // bidirectionality
  std::vector<Edge> pairs = reciprocal_pairs(g);
  std::vector<Edge> uni = unidirectional_edges(g);
  if (pairs.empty())
    throw std::runtime_error("bidirectionality split needs at least one reciprocal pair");
  if (uni.size() < pairs.size())
    throw std::runtime_error(
        "bidirectionality split needs as many unidirectional edges as "
        "reciprocal pairs (" + std::to_string(pairs.size()) + "), graph has " +
        std::to_string(uni.size()));
  std::unordered_set<Edge, PairHash> removed;
  for (const Edge& p : pairs) {
    bool drop_forward = rng.uniform01() < 0.5;
    Edge hidden = drop_forward ? Edge{p.first, p.second} : Edge{p.second, p.first};
    s.test_pos.push_back(hidden);
    removed.insert(hidden);
  }
  rng.shuffle(uni);
  for (std::size_t k = 0; k < pairs.size(); ++k)
    s.test_neg.emplace_back(uni[k].second, uni[k].first);
  s.train = detail::subgraph_without(g, removed);
  return s;
}

// Checks every structural invariant of a split against its source graph.
// Throws std::runtime_error naming the first violated property.
inline void validate_split(const EdgeSplit& s, const DirectedGraph& g) {
  auto fail = [](const std::string& what) {
    throw std::runtime_error("split invariant violated: " + what);
  };
  if (s.train.n != g.n) fail("train graph node count changed");
  const std::size_t m = g.edge_count();

  std::unordered_set<Edge, PairHash> train_set(s.train.edges.begin(), s.train.edges.end());
  std::unordered_set<Edge, PairHash> all;
  auto check_pairs = [&](const std::vector<Edge>& v, const std::string& name) {
    for (const Edge& e : v) {
      if (e.first < 0 || e.first >= g.n || e.second < 0 || e.second >= g.n)
        fail(name + " endpoint out of range");
      if (e.first == e.second) fail(name + " contains a self pair");
      if (!all.insert(e).second) fail(name + " repeats a pair of another partition");
    }
  };
  for (const Edge& e : s.train.edges)
    if (!all.insert(e).second) fail("duplicate train edge");
  check_pairs(s.val_pos, "val_pos");
  check_pairs(s.val_neg, "val_neg");
  check_pairs(s.test_pos, "test_pos");
  check_pairs(s.test_neg, "test_neg");

  for (const Edge& e : s.train.edges)
    if (!g.has_edge(e.first, e.second)) fail("train edge not in source graph");
  for (const Edge& e : s.val_pos)
    if (!g.has_edge(e.first, e.second)) fail("val_pos not in source graph");
  for (const Edge& e : s.test_pos)
    if (!g.has_edge(e.first, e.second)) fail("test_pos not in source graph");
  if (s.train.edge_count() + s.val_pos.size() + s.test_pos.size() != m)
    fail("positive partitions do not cover the edge set");

  if (s.task == SplitTask::general) {
    if (s.val_pos.size() != m / 20 || s.val_neg.size() != m / 20)
      fail("general val sizes");
    if (s.test_pos.size() != m / 10 || s.test_neg.size() != m / 10)
      fail("general test sizes");
    for (const Edge& e : s.val_neg)
      if (g.has_edge(e.first, e.second)) fail("val_neg is an edge");
    for (const Edge& e : s.test_neg)
      if (g.has_edge(e.first, e.second)) fail("test_neg is an edge");
  } else if (s.task == SplitTask::biased_negatives) {
    if (s.val_pos.size() != m / 20 || s.test_pos.size() != m / 10)
      fail("biased positive sizes");
    if (s.val_neg.size() != s.val_pos.size() || s.test_neg.size() != s.test_pos.size())
      fail("biased negative sizes");
    for (std::size_t k = 0; k < s.val_pos.size(); ++k)
      if (s.val_neg[k] != Edge{s.val_pos[k].second, s.val_pos[k].first})
        fail("val_neg is not the reverse of its positive");
    for (std::size_t k = 0; k < s.test_pos.size(); ++k)
      if (s.test_neg[k] != Edge{s.test_pos[k].second, s.test_pos[k].first})
        fail("test_neg is not the reverse of its positive");
    for (const Edge& e : s.val_neg)
      if (g.has_edge(e.first, e.second)) fail("val_neg is an edge");
    for (const Edge& e : s.test_neg)
      if (g.has_edge(e.first, e.second)) fail("test_neg is an edge");
  } else {
    if (!s.val_pos.empty() || !s.val_neg.empty()) fail("bidirectionality has no val");
    if (s.test_pos.size() != reciprocal_pairs(g).size())
      fail("one test positive per reciprocal pair");
    if (s.test_neg.size() != s.test_pos.size()) fail("bidirectionality test sizes");
    if (reciprocity(s.train) != 0.0) fail("train reciprocity must be exactly 0");
    for (const Edge& e : s.test_pos)
      if (!train_set.count({e.second, e.first}))
        fail("reverse of test_pos missing from train");
    for (const Edge& e : s.test_neg) {
      if (g.has_edge(e.first, e.second)) fail("test_neg is an edge");
      if (!train_set.count({e.second, e.first}))
        fail("reverse of test_neg missing from train");
    }
  }
}

// --- directory serialization -------------------------------------------
//
// <dir>/train.edgelist   training edges, "srcLabel dstLabel" per line
// <dir>/nodes.txt        node labels in index order (keeps isolated nodes)
// <dir>/val_pos.pairs    one labeled pair per line; same for the other three
// <dir>/split.json       task, seed, node and partition counts

namespace detail {

inline void write_pairs(const std::filesystem::path& path, const DirectedGraph& g,
                        const std::vector<Edge>& pairs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const Edge& e : pairs)
    out << g.label(e.first) << ' ' << g.label(e.second) << '\n';
}

inline std::vector<Edge> read_pairs(const std::filesystem::path& path,
                                    const std::unordered_map<std::string, int>& index) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Edge> out;
  std::string a, b;
  while (in >> a >> b) {
    auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end() || ib == index.end())
      throw std::runtime_error("unknown node label in " + path.string());
    out.emplace_back(ia->second, ib->second);
  }
  return out;
}

}  // namespace detail

inline void save_split(const EdgeSplit& s, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  fs::path d(dir);
  write_edge_list(s.train, (d / "train.edgelist").string());
  {
    std::ofstream out(d / "nodes.txt");
    if (!out) throw std::runtime_error("cannot write nodes.txt");
    for (int v = 0; v < s.train.n; ++v) out << s.train.label(v) << '\n';
  }
  detail::write_pairs(d / "val_pos.pairs", s.train, s.val_pos);
  detail::write_pairs(d / "val_neg.pairs", s.train, s.val_neg);
  detail::write_pairs(d / "test_pos.pairs", s.train, s.test_pos);
  detail::write_pairs(d / "test_neg.pairs", s.train, s.test_neg);
  nlohmann::json j = {
      {"task", task_name(s.task)},
      {"seed", s.seed},
      {"nodes", s.train.n},
      {"counts",
       {{"train", s.train.edge_count()},
        {"val_pos", s.val_pos.size()},
        {"val_neg", s.val_neg.size()},
        {"test_pos", s.test_pos.size()},
        {"test_neg", s.test_neg.size()}}}};
  std::ofstream out(d / "split.json");
  if (!out) throw std::runtime_error("cannot write split.json");
  out << j.dump(2) << '\n';
}

inline EdgeSplit load_split(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path d(dir);
  std::ifstream jf(d / "split.json");
  if (!jf) throw std::runtime_error("cannot open " + (d / "split.json").string());
  nlohmann::json j = nlohmann::json::parse(jf);

  std::ifstream nf(d / "nodes.txt");
  if (!nf) throw std::runtime_error("cannot open nodes.txt in " + dir);
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> index;
  std::string line;
  while (std::getline(nf, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    index.emplace(line, static_cast<int>(labels.size()));
    labels.push_back(line);
  }

  EdgeSplit s;
  s.task = task_from_name(j.at("task").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  std::vector<Edge> train_edges =
      detail::read_pairs(d / "train.edgelist", index);
  s.train = make_graph(static_cast<int>(labels.size()), train_edges, labels);
  s.val_pos = detail::read_pairs(d / "val_pos.pairs", index);
  s.val_neg = detail::read_pairs(d / "val_neg.pairs", index);
  s.test_pos = detail::read_pairs(d / "test_pos.pairs", index);
  s.test_neg = detail::read_pairs(d / "test_neg.pairs", index);

  auto counts = j.at("counts");
  if (s.train.edge_count() != counts.at("train").get<std::size_t>() ||
      s.val_pos.size() != counts.at("val_pos").get<std::size_t>() ||
      s.val_neg.size() != counts.at("val_neg").get<std::size_t>() ||
      s.test_pos.size() != counts.at("test_pos").get<std::size_t>() ||
      s.test_neg.size() != counts.at("test_neg").get<std::size_t>())
    throw std::runtime_error("split manifest counts do not match files in " + dir);
  return s;
}

}  // namespace gravae
