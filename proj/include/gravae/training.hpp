#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gravae/models.hpp"
#include "gravae/rng.hpp"
#include "gravae/sparse.hpp"

namespace gravae {

// ---------------------------------------------------------------------------
// Model naming
// ---------------------------------------------------------------------------

enum class ModelKind {
  gravity_ae, gravity_vae,
  standard_ae, standard_vae,          // inner-product decoder
  source_target_ae, source_target_vae
};

inline std::string model_name(ModelKind k) {
  switch (k) {
    case ModelKind::gravity_ae: return "gravity_ae";
    case ModelKind::gravity_vae: return "gravity_vae";
    case ModelKind::standard_ae: return "standard_ae";
    case ModelKind::standard_vae: return "standard_vae";
    case ModelKind::source_target_ae: return "source_target_ae";
    case ModelKind::source_target_vae: return "source_target_vae";
  }
  throw std::logic_error("model_name: bad kind");
}

inline ModelKind model_from_name(const std::string& s) {
  for (ModelKind k : {ModelKind::gravity_ae, ModelKind::gravity_vae,
                      ModelKind::standard_ae, ModelKind::standard_vae,
                      ModelKind::source_target_ae, ModelKind::source_target_vae})
    if (model_name(k) == s) return k;
  throw std::invalid_argument("unknown model: " + s);
}

inline DecoderKind decoder_of(ModelKind k) {
  switch (k) {
    case ModelKind::gravity_ae:
    case ModelKind::gravity_vae: return DecoderKind::gravity;
    case ModelKind::standard_ae:
    case ModelKind::standard_vae: return DecoderKind::inner_product;
    case ModelKind::source_target_ae:
    case ModelKind::source_target_vae: return DecoderKind::source_target;
  }
  throw std::logic_error("decoder_of: bad kind");
}

inline bool is_variational(ModelKind k) {
  return k == ModelKind::gravity_vae || k == ModelKind::standard_vae ||
         k == ModelKind::source_target_vae;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;
  std::vector<double> m, v;
};

inline AdamState adam_init(std::size_t n, double beta1 = 0.9, double beta2 = 0.999,
                           double eps = 1e-8) {
  AdamState s;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  return s;
}

inline void adam_step(AdamState& s, std::vector<double>& params,
                      const std::vector<double>& grads, double lr) {
  if (params.size() != s.m.size() || grads.size() != s.m.size())
    throw std::invalid_argument("adam_step: size mismatch");
  ++s.step;
  double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grads[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grads[i] * grads[i];
    double mhat = s.m[i] / c1;
    double vhat = s.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
  ModelKind model = ModelKind::gravity_vae;
  int epochs = 200;
  double learning_rate = 0.1;
  int latent_dim = 32;   // gravity models carry one extra mass output
  int hidden_dim = 64;
  double lambda = 1.0;
  double epsilon = 1e-9;
  bool share_hidden = true;    // VAE mu/log_sigma share the first layer
  bool eval_from_mean = true;  // VAE readout decodes from mu, not a sample
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;

  DecoderConfig decoder() const {
    return DecoderConfig{decoder_of(model), lambda, epsilon};
  }

  void check() const {
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (learning_rate < 0.0) throw std::invalid_argument("learning rate must be >= 0");
    if (latent_dim <= 0 || hidden_dim <= 0)
      throw std::invalid_argument("dimensions must be positive");
    if (decoder_of(model) == DecoderKind::source_target && latent_dim % 2 != 0)
      throw std::invalid_argument("source_target latent_dim must be even");
    decoder().check();
  }

  int output_width() const {
    return latent_dim + (decoder_of(model) == DecoderKind::gravity ? 1 : 0);
  }
};

struct EpochStats {
  double loss = 0.0;     // recon + kl_term, the minimized objective
  double recon = 0.0;
  double kl_term = 0.0;  // KL / n^2, zero for plain autoencoders
};

struct TrainResult {
  TrainConfig config;
  GcnParams params;
  Embedding embedding;  // deterministic readout from the final parameters
  std::vector<EpochStats> history;
};

// Embedding produced by a trained model. Plain AEs decode the output as is;
// variational models read out mu (default) or one reparameterized sample.
inline Embedding model_readout(const DirectedGraph& g, const GcnParams& p,
                               const TrainConfig& cfg,
                               const std::optional<DenseMatrix>& features = std::nullopt) {
  SparseRowMatrix adj = out_degree_normalize(g);
  DenseMatrix raw;
  if (is_variational(cfg.model)) {
    GaussianPosterior q = gcn_forward_vae(adj, features, p);
    if (cfg.eval_from_mean) {
      raw = q.mu;
    } else {
      Rng noise_rng = Rng(cfg.seed).fork(2);
      raw = q.mu;
      for (std::size_t k = 0; k < raw.data.size(); ++k)
        raw.data[k] += std::exp(q.log_sigma.data[k]) * noise_rng.normal();
    }
  } else {
    raw = gcn_forward(adj, features, p);
  }
  return split_embedding(raw, decoder_of(cfg.model));
}

// Full-batch training against the weighted cross-entropy reconstruction of
// the training graph. Bit-identical for identical (graph, config, seed).
inline TrainResult train(const DirectedGraph& g, const TrainConfig& cfg,
                         const std::optional<DenseMatrix>& features = std::nullopt) {
  cfg.check();
  if (g.n < 2) throw std::invalid_argument("train: graph too small");
  if (g.edge_count() == 0) throw std::invalid_argument("train: graph has no edges");

  SparseRowMatrix adj = out_degree_normalize(g);
  SparseRowMatrix adj_t = sparse_transpose(adj);
  DecoderConfig dec = cfg.decoder();
  bool variational = is_variational(cfg.model);

  GcnDims dims;
  dims.in_dim = features ? features->cols : g.n;
  dims.hidden = cfg.hidden_dim;
  dims.out = cfg.output_width();
  dims.variational = variational;
  dims.share_hidden = cfg.share_hidden;

  Rng root(cfg.seed);
  Rng init_rng = root.fork(0);
  Rng noise_rng = root.fork(1);

  TrainResult result;
  result.config = cfg;
  result.params = init_params(dims, init_rng);
  GcnParams& p = result.params;

  std::vector<double> flat = p.flatten();
  AdamState opt = adam_init(flat.size(), cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  result.history.reserve(cfg.epochs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EncoderCache cache;
    EpochStats stats;
    GcnParams grads;
    if (variational) {
      GaussianPosterior q = gcn_forward_vae(adj, features, p, &cache);
      DenseMatrix noise(q.mu.rows, q.mu.cols);
      for (double& v : noise.data) v = noise_rng.normal();
      ElboResult e = elbo(q, noise, dec, g);
      stats.recon = e.recon_loss;
      stats.kl_term = e.kl / (static_cast<double>(g.n) * g.n);
      stats.loss = -e.elbo;
      // minimize -elbo, so flip the elbo gradients
      for (double& v : e.d_mu.data) v = -v;
      for (double& v : e.d_log_sigma.data) v = -v;
      grads = gcn_backward_vae(adj_t, features, p, cache, e.d_mu, e.d_log_sigma);
    } else {
      DenseMatrix raw = gcn_forward(adj, features, p, &cache);
      DecodeLoss loss = reconstruction_loss_fused(raw, dec, g);
      stats.recon = loss.value;
      stats.loss = loss.value;
      grads = gcn_backward(adj_t, features, p, cache, loss.d_raw);
    }
    if (!std::isfinite(stats.loss))
      throw std::runtime_error("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch));
    result.history.push_back(stats);
    adam_step(opt, flat, grads.flatten(), cfg.learning_rate);
    p.unflatten(flat);
  }

  result.embedding = model_readout(g, p, cfg, features);
  return result;
}

// One line per epoch: epoch,loss,kl_term,recon_term
inline void write_loss_csv(const std::vector<EpochStats>& history,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss csv: " + path);
  out << "epoch,loss,kl_term,recon_term\n";
  out.precision(17);
  for (std::size_t e = 0; e < history.size(); ++e)
    out << e << ',' << history[e].loss << ',' << history[e].kl_term << ','
        << history[e].recon << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gravae
