#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gravae/models.hpp"
#include "gravae/splits.hpp"

namespace gravae {

// Area under the ROC curve in the tie-aware rank form:
//   AUC = (#{pos > neg} + 0.5 #{pos = neg}) / (|pos| |neg|)
// computed with average ranks. Rank sums are integers and half-integers,
// which doubles represent exactly, so ties cost no precision.
inline double auc_score(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty())
    throw std::invalid_argument("auc_score: needs both positive and negative scores");
  struct Item { double score; bool positive; };
  std::vector<Item> items;
  items.reserve(pos.size() + neg.size());
  for (double s : pos) items.push_back({s, true});
  for (double s : neg) items.push_back({s, false});
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score < b.score; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) ++j;
    // 1-based ranks i+1 .. j share the average rank (i+1 + j) / 2
    double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (items[k].positive) rank_sum_pos += avg_rank;
    i = j;
  }
  double p = static_cast<double>(pos.size());
  double n = static_cast<double>(neg.size());
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n);
}

// Average precision over the precision-recall curve with one threshold per
// distinct score (descending), tie groups processed whole:
//   AP = sum_k (R_k - R_{k-1}) P_k
inline double ap_score(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty())
    throw std::invalid_argument("ap_score: needs both positive and negative scores");
  struct Item { double score; bool positive; };
  std::vector<Item> items;
  items.reserve(pos.size() + neg.size());
  for (double s : pos) items.push_back({s, true});
  for (double s : neg) items.push_back({s, false});
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score > b.score; });
  double total_pos = static_cast<double>(pos.size());
  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) ++j;
    for (std::size_t k = i; k < j; ++k)
      items[k].positive ? ++tp : ++fp;
    double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    double recall = static_cast<double>(tp) / total_pos;
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

// ---------------------------------------------------------------------------
// Split evaluation
// ---------------------------------------------------------------------------

struct MetricReport {
  double auc = 0.0;  // in [0, 1]
  double ap = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  std::string model, task;
  std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const MetricReport& r) {
  return {{"auc", r.auc},   {"ap", r.ap},     {"n_pos", r.n_pos},
          {"n_neg", r.n_neg}, {"model", r.model}, {"task", r.task},
          {"seed", r.seed}};
}

inline MetricReport metric_report_from_json(const nlohmann::json& j) {
  MetricReport r;
  r.auc = j.at("auc").get<double>();
  r.ap = j.at("ap").get<double>();
  r.n_pos = j.at("n_pos").get<std::size_t>();
  r.n_neg = j.at("n_neg").get<std::size_t>();
  r.model = j.at("model").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

using PairScorer = std::function<double(int, int)>;

inline MetricReport evaluate_pairs(const PairScorer& scorer,
                                   const std::vector<Edge>& pos,
                                   const std::vector<Edge>& neg) {
  if (pos.empty() || neg.empty())
    throw std::invalid_argument("evaluate_pairs: empty pair sets");
  std::vector<double> ps, ns;
  ps.reserve(pos.size());
  ns.reserve(neg.size());
  for (const Edge& e : pos) ps.push_back(scorer(e.first, e.second));
  for (const Edge& e : neg) ns.push_back(scorer(e.first, e.second));
  MetricReport r;
  r.auc = auc_score(ps, ns);
  r.ap = ap_score(ps, ns);
  r.n_pos = pos.size();
  r.n_neg = neg.size();
  return r;
}

// Scores a split's test (or validation) pairs with a decoder over a fixed
// embedding. Deterministic: scoring draws no randomness.
inline MetricReport evaluate_split(const Embedding& emb, const DecoderConfig& cfg,
                                   const EdgeSplit& split, bool use_test = true) {
  const auto& pos = use_test ? split.test_pos : split.val_pos;
  const auto& neg = use_test ? split.test_neg : split.val_neg;
  MetricReport r = evaluate_pairs(
      [&](int i, int j) { return decode_score(emb, cfg, i, j); }, pos, neg);
  r.task = task_name(split.task);
  r.seed = split.seed;
  return r;
}

// ---------------------------------------------------------------------------
// Aggregation across seeds
// ---------------------------------------------------------------------------

struct Aggregate {
  std::size_t runs = 0;
  double auc_mean = 0.0, auc_se = 0.0;  // standard error; 0 for one run
  double ap_mean = 0.0, ap_se = 0.0;
};

inline Aggregate aggregate_reports(const std::vector<MetricReport>& reports) {
  if (reports.empty())
    throw std::invalid_argument("aggregate_reports: no reports");
  Aggregate a;
  a.runs = reports.size();
  double n = static_cast<double>(reports.size());
  for (const MetricReport& r : reports) {
    a.auc_mean += r.auc;
    a.ap_mean += r.ap;
  }
  a.auc_mean /= n;
  a.ap_mean /= n;
  if (reports.size() > 1) {
    double va = 0.0, vp = 0.0;
    for (const MetricReport& r : reports) {
      va += (r.auc - a.auc_mean) * (r.auc - a.auc_mean);
      vp += (r.ap - a.ap_mean) * (r.ap - a.ap_mean);
    }
    a.auc_se = std::sqrt(va / (n - 1.0)) / std::sqrt(n);
    a.ap_se = std::sqrt(vp / (n - 1.0)) / std::sqrt(n);
  }
  return a;
}

// One row per (model, task) group, metrics in percent, mean and standard
// error to two decimals like the benchmark tables.
inline void write_aggregate_csv(const std::vector<MetricReport>& reports,
                                const std::string& path) {
  if (reports.empty())
    throw std::invalid_argument("write_aggregate_csv: no reports");
  std::vector<std::pair<std::string, std::string>> groups;
  for (const MetricReport& r : reports) {
    std::pair<std::string, std::string> key{r.model, r.task};
    if (std::find(groups.begin(), groups.end(), key) == groups.end())
      groups.push_back(key);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write aggregate csv: " + path);
  out << "model,task,runs,auc_mean,auc_se,ap_mean,ap_se\n";
  char buf[64];
  for (const auto& key : groups) {
    std::vector<MetricReport> group;
    for (const MetricReport& r : reports)
      if (r.model == key.first && r.task == key.second) group.push_back(r);
    Aggregate a = aggregate_reports(group);
    out << key.first << ',' << key.second << ',' << a.runs;
    for (double v : {a.auc_mean * 100.0, a.auc_se * 100.0, a.ap_mean * 100.0,
                     a.ap_se * 100.0}) {
      std::snprintf(buf, sizeof(buf), "%.2f", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gravae
