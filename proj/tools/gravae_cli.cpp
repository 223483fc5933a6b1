// Command line front end: graph statistics, benchmark splits, model
// training, checkpoint evaluation, lambda sweeps, centrality analytics, and
// the spectral baseline. Every command prints a JSON summary on stdout and
// exits nonzero on any failure.

#include <atomic>
#include <cctype>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "gravae/analytics.hpp"
#include "gravae/baselines.hpp"
#include "gravae/checkpoint.hpp"
#include "gravae/evaluation.hpp"
#include "gravae/graph.hpp"
#include "gravae/models.hpp"
#include "gravae/runtime.hpp"
#include "gravae/splits.hpp"
#include "gravae/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gravae;

namespace {

// Every long option can also come from the environment as GRAVAE_<NAME>.
CLI::Option* envify(CLI::Option* opt) {
  std::string name = opt->get_single_name();
  for (char& c : name) c = c == '-' ? '_' : static_cast<char>(std::toupper(c));
  opt->envname("GRAVAE_" + name);
  return opt;
}

struct GraphInput {
  std::string path;
  bool csv = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--graph", path, "Edge list file, one edge per line")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_flag("--csv", csv, "Edge list uses comma separated columns");
  }

  DirectedGraph load(LoadReport* report = nullptr) const {
    return load_edge_list(
        path, csv ? EdgeListFormat::csv : EdgeListFormat::whitespace, report);
  }
};

// Shared model hyperparameters for train and sweep.
struct ModelOptions {
  std::string model = "gravity_vae";
  int epochs = 200;
  double learning_rate = 0.1;
  int latent_dim = 32;
  int hidden_dim = 64;
  double lambda = 1.0;
  double epsilon = 1e-9;
  bool share_hidden = true;
  bool eval_from_mean = true;

  void attach(CLI::App* cmd) {
    envify(cmd->add_option("--model", model, "Model kind")
               ->check(CLI::IsMember({"gravity_ae", "gravity_vae", "standard_ae",
                                      "standard_vae", "source_target_ae",
                                      "source_target_vae"})));
    envify(cmd->add_option("--epochs", epochs)->check(CLI::NonNegativeNumber));
    envify(cmd->add_option("--lr", learning_rate, "Adam learning rate"));
    envify(cmd->add_option("--latent-dim", latent_dim)->check(CLI::PositiveNumber));
    envify(cmd->add_option("--hidden-dim", hidden_dim)->check(CLI::PositiveNumber));
    envify(cmd->add_option("--lambda", lambda, "Distance coefficient (gravity decoders)"));
    envify(cmd->add_option("--epsilon", epsilon, "Distance floor inside the log"));
    cmd->add_flag("--share-hidden,!--separate-hidden", share_hidden,
                  "Variational mean and sigma heads share the hidden layer");
    cmd->add_flag("--eval-from-mean,!--sample-readout", eval_from_mean,
                  "Read variational embeddings from mu instead of one sample");
  }

  TrainConfig config() const {
    TrainConfig cfg;
    cfg.model = model_from_name(model);
    cfg.epochs = epochs;
    cfg.learning_rate = learning_rate;
    cfg.latent_dim = latent_dim;
    cfg.hidden_dim = hidden_dim;
    cfg.lambda = lambda;
    cfg.epsilon = epsilon;
    cfg.share_hidden = share_hidden;
    cfg.eval_from_mean = eval_from_mean;
    return cfg;
  }
};

CLI::Option* attach_task(CLI::App* cmd, std::string& task) {
  return envify(cmd->add_option("--task", task, "Split protocol")
                    ->check(CLI::IsMember({"general", "biased_negatives",
                                           "bidirectionality"})));
}

CLI::Option* attach_seeds(CLI::App* cmd, std::vector<std::uint64_t>& seeds) {
  return envify(cmd->add_option("--seeds", seeds, "Comma separated run seeds")
                    ->delimiter(','));
}

void require_distinct(const std::vector<std::uint64_t>& seeds) {
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (std::size_t j = i + 1; j < seeds.size(); ++j)
      if (seeds[i] == seeds[j])
        throw std::invalid_argument("duplicate seed " + std::to_string(seeds[i]));
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads; rethrows the first
// worker exception. Inner loops stay serial when more than one job runs.
void run_jobs(std::size_t count, int jobs,
              const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  int workers = std::min<int>(jobs, static_cast<int>(count));
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

json split_counts(const EdgeSplit& s) {
  return {{"train_edges", s.train.edge_count()},
          {"val_pos", s.val_pos.size()},
          {"val_neg", s.val_neg.size()},
          {"test_pos", s.test_pos.size()},
          {"test_neg", s.test_neg.size()}};
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

int cmd_stats(const GraphInput& in) {
  LoadReport rep;
  DirectedGraph g = in.load(&rep);
  int max_out = 0, max_in = 0, dangling = 0;
  for (int v = 0; v < g.n; ++v) {
    max_out = std::max(max_out, g.out_degree(v));
    max_in = std::max(max_in, g.in_degree(v));
    if (g.out_degree(v) == 0) ++dangling;
  }
  json j = {{"path", in.path},
            {"nodes", g.n},
            {"edges", g.edge_count()},
            {"reciprocity", reciprocity(g)},
            {"reciprocal_pairs", reciprocal_pairs(g).size()},
            {"unidirectional_edges", unidirectional_edges(g).size()},
            {"max_out_degree", max_out},
            {"max_in_degree", max_in},
            {"dangling_nodes", dangling},
            {"raw_lines", rep.raw_lines},
            {"self_loops_dropped", rep.self_loops_dropped},
            {"duplicates_dropped", rep.duplicates_dropped}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

int cmd_split(const GraphInput& in, const std::string& task, std::uint64_t seed,
              const std::string& out_dir) {
  DirectedGraph g = in.load();
  EdgeSplit s = make_split(g, task_from_name(task), seed);
  validate_split(s, g);
  save_split(s, out_dir);
  json j = {{"out_dir", out_dir}, {"task", task}, {"seed", seed},
            {"counts", split_counts(s)}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const GraphInput& in, const ModelOptions& model,
              const std::string& task, const std::vector<std::uint64_t>& seeds,
              const std::string& out_dir, int jobs, bool full_graph,
              bool export_embeddings) {
  require_distinct(seeds);
  DirectedGraph g = in.load();
  fs::create_directories(out_dir);
  fs::path out(out_dir);
  TrainConfig base = model.config();
  base.check();

  std::vector<MetricReport> reports(seeds.size());
  run_jobs(seeds.size(), jobs, [&](std::size_t k) {
    TrainConfig cfg = base;
    cfg.seed = seeds[k];
    std::string tag = "_seed" + std::to_string(seeds[k]);

    EdgeSplit split;
    const DirectedGraph* train_graph = &g;
    if (!full_graph) {
      split = make_split(g, task_from_name(task), seeds[k]);
      validate_split(split, g);
      train_graph = &split.train;
    }
    TrainResult tr = train(*train_graph, cfg);
    save_checkpoint(tr.params, cfg, (out / ("ckpt" + tag + ".bin")).string());
    write_loss_csv(tr.history, (out / ("loss" + tag + ".csv")).string());
    if (export_embeddings)
      export_embedding_csv(g, tr.embedding,
                           (out / ("embedding" + tag + ".csv")).string());
    if (!full_graph) {
      MetricReport r = evaluate_split(tr.embedding, cfg.decoder(), split);
      r.model = model_name(cfg.model);
      write_json(to_json(r), (out / ("report" + tag + ".json")).string());
      reports[k] = r;
    }
  });

  json manifest = {{"command", "train"},
                   {"graph", in.path},
                   {"nodes", g.n},
                   {"edges", g.edge_count()},
                   {"model", model.model},
                   {"task", full_graph ? "none" : task},
                   {"seeds", seeds},
                   {"epochs", model.epochs},
                   {"learning_rate", model.learning_rate},
                   {"latent_dim", model.latent_dim},
                   {"hidden_dim", model.hidden_dim},
                   {"lambda", model.lambda},
                   {"epsilon", model.epsilon},
                   {"share_hidden", model.share_hidden},
                   {"eval_from_mean", model.eval_from_mean}};
  if (!full_graph) {
    write_aggregate_csv(reports, (out / "aggregate.csv").string());
    Aggregate a = aggregate_reports(reports);
    manifest["aggregate"] = {{"runs", a.runs},
                             {"auc_mean", a.auc_mean},
                             {"auc_se", a.auc_se},
                             {"ap_mean", a.ap_mean},
                             {"ap_se", a.ap_se}};
  }
  write_json(manifest, (out / "manifest.json").string());
  std::cout << manifest.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const std::string& ckpt_path, const std::string& split_dir,
             bool use_val, const std::string& out_path) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  GcnParams params = ckpt.materialize();
  EdgeSplit split = load_split(split_dir);
  if (ckpt.dims.in_dim != split.train.n)
    throw std::runtime_error(
        "checkpoint input width " + std::to_string(ckpt.dims.in_dim) +
        " does not match split node count " + std::to_string(split.train.n));
  Embedding emb = model_readout(split.train, params, ckpt.config);
  MetricReport r = evaluate_split(emb, ckpt.config.decoder(), split, !use_val);
  r.model = model_name(ckpt.config.model);
  json j = to_json(r);
  j["checkpoint"] = ckpt_path;
  j["split_dir"] = split_dir;
  j["pairs"] = use_val ? "val" : "test";
  if (!out_path.empty()) write_json(j, out_path);
  std::cout << j.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int cmd_sweep(const GraphInput& in, const ModelOptions& model,
              const std::string& task, const std::vector<std::uint64_t>& seeds,
              const std::vector<double>& lambdas, const std::string& out_csv) {
  require_distinct(seeds);
  DirectedGraph g = in.load();
  TrainConfig base = model.config();
  base.check();
  std::vector<SweepPoint> points =
      lambda_sweep(g, task_from_name(task), lambdas, seeds, base);
  write_sweep_csv(points, model.model, task, out_csv);
  json rows = json::array();
  for (const SweepPoint& p : points)
    rows.push_back({{"lambda", p.lambda},
                    {"runs", p.aggregate.runs},
                    {"auc_mean", p.aggregate.auc_mean},
                    {"auc_se", p.aggregate.auc_se},
                    {"ap_mean", p.aggregate.ap_mean},
                    {"ap_se", p.aggregate.ap_se}});
  json j = {{"out_csv", out_csv}, {"model", model.model}, {"task", task},
            {"points", rows}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

int cmd_analyze(const GraphInput& in, const std::string& ckpt_path,
                double damping, double katz_alpha, double katz_beta,
                const std::string& out_dir) {
  DirectedGraph g = in.load();
  fs::create_directories(out_dir);
  fs::path out(out_dir);

  std::vector<double> outd = out_degrees(g);
  std::vector<double> ind = in_degrees(g);
  std::vector<double> btw = betweenness_centrality(g);
  std::vector<double> pr = pagerank(g, damping);
  std::vector<double> kc = katz_centrality(g, katz_alpha, katz_beta);

  {
    std::ofstream csv(out / "centralities.csv");
    if (!csv) throw std::runtime_error("cannot write centralities.csv");
    csv << "node_label,out_degree,in_degree,betweenness,pagerank,katz\n";
    char buf[64];
    for (int v = 0; v < g.n; ++v) {
      csv << g.label(v) << ',' << g.out_degree(v) << ',' << g.in_degree(v);
      for (double x : {btw[v], pr[v], kc[v]}) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        csv << ',' << buf;
      }
      csv << '\n';
    }
  }

  json correlations = {{"in_degree_vs_out_degree", pearson(ind, outd)},
                       {"betweenness_vs_in_degree", pearson(btw, ind)},
                       {"pagerank_vs_in_degree", pearson(pr, ind)},
                       {"katz_vs_out_degree", pearson(kc, outd)}};
  if (!ckpt_path.empty()) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    if (ckpt.dims.in_dim != g.n)
      throw std::runtime_error("checkpoint was trained on a different graph");
    Embedding emb = model_readout(g, ckpt.materialize(), ckpt.config);
    export_embedding_csv(g, emb, (out / "embedding.csv").string());
    if (!emb.mass.empty()) {
      correlations["mass_vs_out_degree"] = pearson(emb.mass, outd);
      correlations["mass_vs_in_degree"] = pearson(emb.mass, ind);
      correlations["mass_vs_betweenness"] = pearson(emb.mass, btw);
      correlations["mass_vs_pagerank"] = pearson(emb.mass, pr);
      correlations["mass_vs_katz"] = pearson(emb.mass, kc);
    }
  }
  write_json(correlations, (out / "correlations.json").string());

  json j = {{"out_dir", out_dir}, {"nodes", g.n}, {"edges", g.edge_count()},
            {"correlations", correlations}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// hope
// ---------------------------------------------------------------------------

int cmd_hope(const GraphInput& in, const std::string& task,
             const std::vector<std::uint64_t>& seeds, double beta, int rank,
             const std::string& out_dir) {
  require_distinct(seeds);
  DirectedGraph g = in.load();
  fs::create_directories(out_dir);
  fs::path out(out_dir);

  std::vector<MetricReport> reports(seeds.size());
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    EdgeSplit split = make_split(g, task_from_name(task), seeds[k]);
    HopeConfig cfg;
    cfg.beta = beta;
    cfg.rank = rank;
    cfg.seed = seeds[k];
    HopeEmbedding emb = hope_embed(split.train, cfg);
    MetricReport r = evaluate_pairs(
        [&](int i, int j) { return emb.score(i, j); }, split.test_pos,
        split.test_neg);
    r.model = "hope";
    r.task = task;
    r.seed = seeds[k];
    std::string tag = "_seed" + std::to_string(seeds[k]);
    write_json(to_json(r), (out / ("report" + tag + ".json")).string());
    reports[k] = r;
  }
  write_aggregate_csv(reports, (out / "aggregate.csv").string());

  Aggregate a = aggregate_reports(reports);
  json j = {{"command", "hope"},
            {"graph", in.path},
            {"task", task},
            {"seeds", seeds},
            {"beta", beta},
            {"rank", rank},
            {"aggregate",
             {{"runs", a.runs},
              {"auc_mean", a.auc_mean},
              {"auc_se", a.auc_se},
              {"ap_mean", a.ap_mean},
              {"ap_se", a.ap_se}}}};
  write_json(j, (out / "manifest.json").string());
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed graph embeddings with gravity-style decoders"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read option defaults from an INI/TOML file");
  app.set_version_flag("--version", "gravae 1.0.0");
  int threads = 0;
  envify(app.add_option("--threads", threads,
                        "Worker threads for parallel loops (0 = hardware)"));

  int rc = 1;

  auto* stats = app.add_subcommand("stats", "Print edge list statistics as JSON");
  GraphInput stats_in;
  stats_in.attach(stats);
  stats->callback([&] {
    set_thread_count(threads);
    rc = cmd_stats(stats_in);
  });

  auto* split = app.add_subcommand("split", "Write a benchmark split directory");
  GraphInput split_in;
  split_in.attach(split);
  std::string split_task = "general";
  std::uint64_t split_seed = 0;
  std::string split_out;
  attach_task(split, split_task);
  envify(split->add_option("--seed", split_seed));
  split->add_option("--out", split_out, "Output directory")->required();
  split->callback([&] {
    set_thread_count(threads);
    rc = cmd_split(split_in, split_task, split_seed, split_out);
  });

  auto* train = app.add_subcommand("train", "Train one model over several seeds");
  GraphInput train_in;
  train_in.attach(train);
  ModelOptions train_model;
  train_model.attach(train);
  std::string train_task = "general";
  std::vector<std::uint64_t> train_seeds{0, 1, 2, 3, 4};
  std::string train_out;
  int train_jobs = 1;
  bool train_full = false, train_export = false;
  attach_task(train, train_task);
  attach_seeds(train, train_seeds);
  train->add_option("--out", train_out, "Output directory")->required();
  envify(train->add_option("--jobs", train_jobs, "Concurrent seeds")
             ->check(CLI::PositiveNumber));
  train->add_flag("--full-graph", train_full,
                  "Train on every edge; skip the split and the evaluation");
  train->add_flag("--export-embeddings", train_export,
                  "Also write embedding_seed<k>.csv per seed");
  train->callback([&] {
    // Concurrent seeds keep their inner loops serial to avoid oversubscription.
    set_thread_count(train_jobs > 1 ? 1 : threads);
    rc = cmd_train(train_in, train_model, train_task, train_seeds, train_out,
                   train_jobs, train_full, train_export);
  });

  auto* eval = app.add_subcommand("eval", "Score a checkpoint against a split");
  std::string eval_ckpt, eval_split, eval_out;
  bool eval_val = false;
  eval->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval->add_option("--split-dir", eval_split)
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_flag("--val", eval_val, "Score validation pairs instead of test");
  eval->add_option("--out", eval_out, "Also write the report JSON here");
  eval->callback([&] {
    set_thread_count(threads);
    rc = cmd_eval(eval_ckpt, eval_split, eval_val, eval_out);
  });

  auto* sweep = app.add_subcommand("sweep", "Retrain across a lambda grid");
  GraphInput sweep_in;
  sweep_in.attach(sweep);
  ModelOptions sweep_model;
  sweep_model.attach(sweep);
  std::string sweep_task = "general";
  std::vector<std::uint64_t> sweep_seeds{0, 1, 2, 3, 4};
  std::vector<double> sweep_lambdas;
  std::string sweep_out;
  attach_task(sweep, sweep_task);
  attach_seeds(sweep, sweep_seeds);
  sweep->add_option("--lambdas", sweep_lambdas, "Comma separated lambda grid")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", sweep_out, "Output CSV path")->required();
  sweep->callback([&] {
    set_thread_count(threads);
    rc = cmd_sweep(sweep_in, sweep_model, sweep_task, sweep_seeds, sweep_lambdas,
                   sweep_out);
  });

  auto* analyze = app.add_subcommand("analyze", "Centrality table and correlations");
  GraphInput analyze_in;
  analyze_in.attach(analyze);
  std::string analyze_ckpt, analyze_out;
  double analyze_damping = 0.85, analyze_alpha = -1.0, analyze_beta = 1.0;
  analyze->add_option("--checkpoint", analyze_ckpt,
                      "Correlate the model's mass column with centralities")
      ->check(CLI::ExistingFile);
  envify(analyze->add_option("--damping", analyze_damping, "PageRank damping"));
  envify(analyze->add_option("--katz-alpha", analyze_alpha,
                             "Katz attenuation; <= 0 picks it from the spectrum"));
  envify(analyze->add_option("--katz-beta", analyze_beta, "Katz base score"));
  analyze->add_option("--out", analyze_out, "Output directory")->required();
  analyze->callback([&] {
    set_thread_count(threads);
    rc = cmd_analyze(analyze_in, analyze_ckpt, analyze_damping, analyze_alpha,
                     analyze_beta, analyze_out);
  });

  auto* hope = app.add_subcommand("hope", "Spectral proximity baseline");
  GraphInput hope_in;
  hope_in.attach(hope);
  std::string hope_task = "general";
  std::vector<std::uint64_t> hope_seeds{0, 1, 2, 3, 4};
  double hope_beta = 0.01;
  int hope_rank = 16;
  std::string hope_out;
  attach_task(hope, hope_task);
  attach_seeds(hope, hope_seeds);
  envify(hope->add_option("--beta", hope_beta, "Katz proximity decay"));
  envify(hope->add_option("--rank", hope_rank)->check(CLI::PositiveNumber));
  hope->add_option("--out", hope_out, "Output directory")->required();
  hope->callback([&] {
    set_thread_count(threads);
    rc = cmd_hope(hope_in, hope_task, hope_seeds, hope_beta, hope_rank, hope_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
