#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "gravae/evaluation.hpp"
#include "gravae/rng.hpp"

using namespace gravae;

namespace {

// Literal counting oracle: (#{p > n} + 0.5 #{p == n}) / (P N).
double auc_brute_force(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0, ties = 0.0;
  for (double p : pos)
    for (double n : neg) {
      if (p > n) wins += 1.0;
      else if (p == n) ties += 1.0;
    }
  return (wins + 0.5 * ties) /
         (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

// Independent AP recomputation: walk distinct thresholds descending with the
// same floating-point expressions as the production code.
double ap_oracle(const std::vector<double>& pos, const std::vector<double>& neg) {
  std::map<double, std::pair<int, int>, std::greater<double>> groups;
  for (double p : pos) ++groups[p].first;
  for (double n : neg) ++groups[n].second;
  double total_pos = static_cast<double>(pos.size());
  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  for (const auto& [score, counts] : groups) {
    tp += counts.first;
    fp += counts.second;
    double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    double recall = static_cast<double>(tp) / total_pos;
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

std::vector<double> random_scores(int n, Rng& rng, bool quantize) {
  std::vector<double> v(n);
  for (double& x : v) {
    x = rng.uniform01();
    if (quantize) x = std::round(x * 8.0) / 8.0;  // force plenty of ties
  }
  return v;
}

}  // namespace

TEST_CASE("auc on hand examples") {
  // perfect separation
  REQUIRE(auc_score({0.9, 0.8}, {0.2, 0.1}) == 1.0);
  // perfect inversion
  REQUIRE(auc_score({0.1, 0.2}, {0.8, 0.9}) == 0.0);
  // all scores equal: pure ties
  REQUIRE(auc_score({0.5, 0.5, 0.5}, {0.5, 0.5}) == 0.5);
  // three of four pairs ranked correctly: only (0.3, 0.6) is inverted
  REQUIRE(auc_score({0.7, 0.3}, {0.6, 0.2}) == 0.75);
  REQUIRE_THROWS(auc_score({}, {0.5}));
  REQUIRE_THROWS(auc_score({0.5}, {}));
}

TEST_CASE("auc equals the brute-force count exactly on random score sets") {
  Rng rng(301);
  for (int trial = 0; trial < 60; ++trial) {
    bool quantize = trial % 2 == 0;
    std::vector<double> pos = random_scores(3 + trial % 40, rng, quantize);
    std::vector<double> neg = random_scores(2 + (trial * 7) % 50, rng, quantize);
    REQUIRE(auc_score(pos, neg) == auc_brute_force(pos, neg));
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  Rng rng(302);
  std::vector<double> pos = random_scores(25, rng, true);
  std::vector<double> neg = random_scores(30, rng, true);
  double base = auc_score(pos, neg);
  auto apply = [](std::vector<double> v, auto f) {
    for (double& x : v) x = f(x);
    return v;
  };
  auto exp_t = [](double x) { return std::exp(x); };
  auto affine = [](double x) { return 3.0 * x + 2.0; };
  REQUIRE(auc_score(apply(pos, exp_t), apply(neg, exp_t)) == base);
  REQUIRE(auc_score(apply(pos, affine), apply(neg, affine)) == base);
}

TEST_CASE("swapping positives and negatives reflects auc around one half") {
  Rng rng(303);
  std::vector<double> pos = random_scores(20, rng, false);
  std::vector<double> neg = random_scores(35, rng, false);
  double a = auc_score(pos, neg);
  double b = auc_score(neg, pos);
  REQUIRE(std::abs(a + b - 1.0) < 1e-12);
}

TEST_CASE("ap on hand examples") {
  // perfect ranking: precision 1 at every recall level
  REQUIRE(ap_score({0.9, 0.8}, {0.2, 0.1}) == 1.0);
  // single threshold (all scores identical): AP = pos fraction
  REQUIRE(ap_score({0.5, 0.5}, {0.5, 0.5}) == 0.5);
  // worst ranking: AP = sum over positives of k / (N + k) ordering
  double worst = ap_score({0.1, 0.2}, {0.8, 0.9});
  // thresholds: 0.9(n) 0.8(n) 0.2(p: P=1/3 R=1/2) 0.1(p: P=2/4 R=1)
  REQUIRE(std::abs(worst - (0.5 * (1.0 / 3.0) + 0.5 * 0.5)) < 1e-15);
}

TEST_CASE("ap equals an independent recomputation exactly") {
  Rng rng(304);
  for (int trial = 0; trial < 60; ++trial) {
    bool quantize = trial % 2 == 1;
    std::vector<double> pos = random_scores(4 + trial % 30, rng, quantize);
    std::vector<double> neg = random_scores(3 + (trial * 5) % 45, rng, quantize);
    REQUIRE(ap_score(pos, neg) == ap_oracle(pos, neg));
  }
}

TEST_CASE("evaluate_pairs wires scores through both metrics") {
  // oracle scorer: score = 1 for real pairs, 0 otherwise
  std::vector<Edge> pos{{0, 1}, {1, 2}, {2, 3}};
  std::vector<Edge> neg{{3, 0}, {2, 0}, {1, 3}};
  auto oracle = [&](int i, int j) {
    for (const Edge& e : pos)
      if (e == Edge{i, j}) return 1.0;
    return 0.0;
  };
  MetricReport r = evaluate_pairs(oracle, pos, neg);
  REQUIRE(r.auc == 1.0);
  REQUIRE(r.ap == 1.0);
  REQUIRE(r.n_pos == 3);
  REQUIRE(r.n_neg == 3);
  auto constant = [](int, int) { return 0.4; };
  MetricReport rc = evaluate_pairs(constant, pos, neg);
  REQUIRE(rc.auc == 0.5);
  REQUIRE_THROWS(evaluate_pairs(constant, {}, neg));
}

TEST_CASE("symmetric scorers cannot beat chance on reverse-negative splits") {
  // biased-negative style evaluation: negatives are exact reverses
  Rng rng(305);
  std::vector<Edge> pos;
  for (int k = 0; k < 40; ++k) {
    int i = static_cast<int>(rng.uniform_int(30));
    int j = static_cast<int>(rng.uniform_int(30));
    if (i != j) pos.emplace_back(i, j);
  }
  std::vector<Edge> neg;
  for (const Edge& e : pos) neg.emplace_back(e.second, e.first);
  DenseMatrix z(30, 6);
  for (double& v : z.data) v = rng.normal();
  Embedding e;
  e.z = z;
  DecoderConfig cfg{DecoderKind::inner_product, 1.0, 1e-9};
  MetricReport r = evaluate_pairs(
      [&](int i, int j) { return decode_score(e, cfg, i, j); }, pos, neg);
  REQUIRE(r.auc == 0.5);  // exactly, by the tie-aware rank computation
}

TEST_CASE("aggregate computes mean and standard error, zero for one run") {
  MetricReport a;
  a.auc = 0.80;
  a.ap = 0.70;
  MetricReport b = a;
  b.auc = 0.90;
  b.ap = 0.74;
  Aggregate one = aggregate_reports({a});
  REQUIRE(one.runs == 1);
  REQUIRE(one.auc_mean == 0.80);
  REQUIRE(one.auc_se == 0.0);
  Aggregate two = aggregate_reports({a, b});
  REQUIRE(std::abs(two.auc_mean - 0.85) < 1e-15);
  // sample sd = 0.05 * sqrt(2), se = sd / sqrt(2) -> 0.05
  REQUIRE(std::abs(two.auc_se - 0.05) < 1e-12);
  REQUIRE(std::abs(two.ap_mean - 0.72) < 1e-15);
  REQUIRE_THROWS(aggregate_reports({}));
}

TEST_CASE("aggregate csv groups rows by model and task") {
  namespace fs = std::filesystem;
  MetricReport a;
  a.model = "gravity_vae";
  a.task = "general";
  a.auc = 0.9123;
  a.ap = 0.9231;
  a.seed = 1;
  MetricReport b = a;
  b.seed = 2;
  b.auc = 0.9223;
  MetricReport c = a;
  c.model = "standard_ae";
  fs::path p = fs::temp_directory_path() / "gravae_aggregate.csv";
  write_aggregate_csv({a, b, c}, p.string());
  std::ifstream in(p);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  REQUIRE(header == "model,task,runs,auc_mean,auc_se,ap_mean,ap_se");
  REQUIRE(row1.substr(0, 20) == "gravity_vae,general,");
  REQUIRE(row1.find("91.73") != std::string::npos);  // percent scale
  REQUIRE(row2.substr(0, 20) == "standard_ae,general,");
}

TEST_CASE("metric report json round trip") {
  MetricReport r;
  r.auc = 0.875;
  r.ap = 0.8125;
  r.n_pos = 10;
  r.n_neg = 12;
  r.model = "gravity_ae";
  r.task = "biased_negatives";
  r.seed = 42;
  MetricReport s = metric_report_from_json(to_json(r));
  REQUIRE(s.auc == r.auc);
  REQUIRE(s.ap == r.ap);
  REQUIRE(s.n_pos == r.n_pos);
  REQUIRE(s.n_neg == r.n_neg);
  REQUIRE(s.model == r.model);
  REQUIRE(s.task == r.task);
  REQUIRE(s.seed == r.seed);
}
