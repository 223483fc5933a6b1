#pragma once

#include <cmath>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gravae/graph.hpp"
#include "gravae/kernels.hpp"
#include "gravae/matrix.hpp"
#include "gravae/rng.hpp"
#include "gravae/runtime.hpp"
#include "gravae/sparse.hpp"

namespace gravae {

// ---------------------------------------------------------------------------
// Decoders
// ---------------------------------------------------------------------------

enum class DecoderKind { gravity, inner_product, source_target };

inline std::string decoder_name(DecoderKind k) {
  switch (k) {
    case DecoderKind::gravity: return "gravity";
    case DecoderKind::inner_product: return "inner_product";
    case DecoderKind::source_target: return "source_target";
  }
  throw std::logic_error("decoder_name: bad kind");
}

inline DecoderKind decoder_from_name(const std::string& s) {
  if (s == "gravity") return DecoderKind::gravity;
  if (s == "inner_product") return DecoderKind::inner_product;
  if (s == "source_target") return DecoderKind::source_target;
  throw std::invalid_argument("unknown decoder: " + s);
}

struct DecoderConfig {
  DecoderKind kind = DecoderKind::gravity;
  double lambda = 1.0;    // distance exponent, gravity only
  double epsilon = 1e-9;  // floor added to squared distances before the log

  void check() const {
    if (lambda <= 0.0) throw std::invalid_argument("decoder lambda must be > 0");
    if (epsilon <= 0.0) throw std::invalid_argument("decoder epsilon must be > 0");
  }
};

// Node representations as consumed by a decoder. For the gravity decoder the
// raw encoder output has d+1 columns: latent position plus the mass term
// picked up by the (d+1)-th output unit.
struct Embedding {
  DenseMatrix z;             // n x d latent positions
  std::vector<double> mass;  // n mass logits, gravity decoders only

  int n() const { return z.rows; }
  int dim() const { return z.cols; }
};

inline Embedding split_embedding(const DenseMatrix& raw, DecoderKind kind) {
  Embedding e;
  if (kind == DecoderKind::gravity) {
    if (raw.cols < 2)
      throw std::invalid_argument("gravity embedding needs at least 2 columns");
    e.z = DenseMatrix(raw.rows, raw.cols - 1);
    e.mass.resize(raw.rows);
    for (int i = 0; i < raw.rows; ++i) {
      for (int k = 0; k + 1 < raw.cols; ++k) e.z.at(i, k) = raw.at(i, k);
      e.mass[i] = raw.at(i, raw.cols - 1);
    }
  } else {
    if (kind == DecoderKind::source_target && raw.cols % 2 != 0)
      throw std::invalid_argument("source_target embedding needs even width");
    e.z = raw;
  }
  return e;
}

// Logit of the edge probability for the ordered pair (i, j).
inline double decode_logit(const Embedding& e, const DecoderConfig& cfg, int i, int j) {
  switch (cfg.kind) {
    case DecoderKind::gravity: {
      double r2 = 0.0;
      for (int k = 0; k < e.z.cols; ++k) {
        double d = e.z.at(i, k) - e.z.at(j, k);
        r2 += d * d;
      }
      return e.mass[j] - cfg.lambda * std::log(r2 + cfg.epsilon);
    }
    case DecoderKind::inner_product:
      return dot(e.z.row(i), e.z.row(j), e.z.cols);
    case DecoderKind::source_target: {
      int h = e.z.cols / 2;
      return dot(e.z.row(i), e.z.row(j) + h, h);
    }
  }
  throw std::logic_error("decode_logit: bad kind");
}

inline double decode_score(const Embedding& e, const DecoderConfig& cfg, int i, int j) {
  return sigmoid(decode_logit(e, cfg, i, j));
}

inline DenseMatrix decode_logits_full(const Embedding& e, const DecoderConfig& cfg) {
  cfg.check();
  int n = e.n();
  DenseMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = decode_logit(e, cfg, i, j);
  return out;
}

inline DenseMatrix decode_scores_full(const Embedding& e, const DecoderConfig& cfg) {
  DenseMatrix out = decode_logits_full(e, cfg);
  for (double& v : out.data) v = sigmoid(v);
  return out;
}

inline std::vector<double> decode_scores(const Embedding& e, const DecoderConfig& cfg,
                                         const std::vector<Edge>& pairs) {
  cfg.check();
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const Edge& p : pairs)
    out.push_back(decode_score(e, cfg, p.first, p.second));
  return out;
}

// ---------------------------------------------------------------------------
// Reconstruction objective
// ---------------------------------------------------------------------------
//
// Mean over all n^2 ordered pairs (diagonal included, target 0) of the
// class-weighted cross entropy against the adjacency matrix, computed in
// logit space:
//
//   loss = (1/n^2) sum_ij [ w A_ij softplus(-l_ij) + (1 - A_ij) softplus(l_ij) ]
//   w    = (n^2 - m) / m
//
// Logits are clamped to [-30, 30]; the clamp contributes zero gradient
// outside the window.

inline constexpr double kLogitClip = 30.0;

namespace detail {

// Per-entry loss and d(loss)/d(logit), both already scaled by `scale`
// (1/n^2, times w on positive entries).
inline void entry_loss(double logit, bool positive, double w, double scale,
                       double& loss, double& dlogit) {
  double lc = logit < -kLogitClip ? -kLogitClip : (logit > kLogitClip ? kLogitClip : logit);
  bool active = logit > -kLogitClip && logit < kLogitClip;
  if (positive) {
    loss = scale * w * softplus(-lc);
    dlogit = active ? -scale * w * sigmoid(-lc) : 0.0;
  } else {
    loss = scale * softplus(lc);
    dlogit = active ? scale * sigmoid(lc) : 0.0;
  }
}

inline double positive_weight(const DirectedGraph& g) {
  if (g.edge_count() == 0)
    throw std::invalid_argument("reconstruction loss needs at least one edge");
  double n2 = static_cast<double>(g.n) * g.n;
  double m = static_cast<double>(g.edge_count());
  return (n2 - m) / m;
}

}  // namespace detail

struct LogitLoss {
  double value = 0.0;
  DenseMatrix d_logits;
};

// Reference form over an explicit logit matrix. The training path never
// materializes this; see reconstruction_loss_fused below.
inline LogitLoss weighted_cross_entropy(const DenseMatrix& logits, const DirectedGraph& g) {
  if (logits.rows != g.n || logits.cols != g.n)
    throw std::invalid_argument("weighted_cross_entropy: logits must be n x n");
  double w = detail::positive_weight(g);
  double scale = 1.0 / (static_cast<double>(g.n) * g.n);
  LogitLoss out;
  out.d_logits = DenseMatrix(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      double l, dl;
      detail::entry_loss(logits.at(i, j), i != j && g.has_edge(i, j), w, scale, l, dl);
      out.value += l;
      out.d_logits.at(i, j) = dl;
    }
  }
  return out;
}

struct DecodeLoss {
  double value = 0.0;
  DenseMatrix d_raw;  // gradient w.r.t. the raw n x width decoder input
};

// Loss plus gradient over all n^2 pairs without building any n x n matrix.
// Rows are processed independently (deterministically chunked); row i owns
// the loss terms of ordered pairs (i, *) and the gradient rows of node i,
// using both adjacency directions so no cross-row writes are needed.
inline DecodeLoss reconstruction_loss_fused(const DenseMatrix& raw,
                                            const DecoderConfig& cfg,
                                            const DirectedGraph& g) {
  cfg.check();
  const int n = g.n;
  if (raw.rows != n) throw std::invalid_argument("fused loss: row count != n");
  const double w = detail::positive_weight(g);
  const double scale = 1.0 / (static_cast<double>(n) * n);

  DecodeLoss out;
  out.d_raw = DenseMatrix(raw.rows, raw.cols);
  std::vector<double> partial(kParallelChunks, 0.0);

  const bool gravity = cfg.kind == DecoderKind::gravity;
  const bool source_target = cfg.kind == DecoderKind::source_target;
  const int d = gravity ? raw.cols - 1 : raw.cols;
  if (gravity && raw.cols < 2)
    throw std::invalid_argument("fused loss: gravity needs >= 2 columns");
  if (source_target && raw.cols % 2 != 0)
    throw std::invalid_argument("fused loss: source_target needs even width");
  const int half = source_target ? d / 2 : 0;

  std::vector<double> sqnorm;
  if (gravity) {
    sqnorm.resize(n);
    for (int i = 0; i < n; ++i) sqnorm[i] = dot(raw.row(i), raw.row(i), d);
  }

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi,
                                                std::size_t chunk) {
    std::vector<unsigned char> is_out(n, 0), is_in(n, 0);
    double acc = 0.0;
    for (std::size_t row = lo; row < hi; ++row) {
      int i = static_cast<int>(row);
      for (int k = g.out_offsets[i]; k < g.out_offsets[i + 1]; ++k)
        is_out[g.out_targets[k]] = 1;
      for (int k = g.in_offsets[i]; k < g.in_offsets[i + 1]; ++k)
        is_in[g.in_sources[k]] = 1;

      const double* zi = raw.row(i);
      double* di = out.d_raw.row(i);

      if (gravity) {
        const double mi = raw.at(i, d);
        // diagonal pair (i, i): distance exactly 0, target 0, i is target
        {
          double l = mi - cfg.lambda * std::log(cfg.epsilon);
          double lv, dl;
          detail::entry_loss(l, false, w, scale, lv, dl);
          acc += lv;
          di[d] += dl;
        }
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const double* zj = raw.row(j);
          double r2 = sqnorm[i] + sqnorm[j] - 2.0 * dot(zi, zj, d);
          if (r2 < 0.0) r2 = 0.0;
          double t = r2 + cfg.epsilon;
          double u = std::log(t);
          double lij = raw.at(j, d) - cfg.lambda * u;  // i -> j uses mass of j
          double lji = mi - cfg.lambda * u;
          double lv, gij, lv_back, gji;
          detail::entry_loss(lij, is_out[j] != 0, w, scale, lv, gij);
          detail::entry_loss(lji, is_in[j] != 0, w, scale, lv_back, gji);
          acc += lv;  // pair (i, j) counted here; (j, i) counted by row j
          di[d] += gji;
          double c = (gij + gji) * (-cfg.lambda / t) * 2.0;
          for (int k = 0; k < d; ++k) di[k] += c * (zi[k] - zj[k]);
        }
      } else if (source_target) {
        for (int j = 0; j < n; ++j) {
          const double* zj = raw.row(j);
          if (j == i) {
            double l = dot(zi, zi + half, half);
            double lv, dl;
            detail::entry_loss(l, false, w, scale, lv, dl);
            acc += lv;
            for (int k = 0; k < half; ++k) {
              di[k] += dl * zi[half + k];
              di[half + k] += dl * zi[k];
            }
            continue;
          }
          double lij = dot(zi, zj + half, half);
          double lji = dot(zj, zi + half, half);
          double lv, gij, lv_back, gji;
          detail::entry_loss(lij, is_out[j] != 0, w, scale, lv, gij);
          detail::entry_loss(lji, is_in[j] != 0, w, scale, lv_back, gji);
          acc += lv;
          for (int k = 0; k < half; ++k) {
            di[k] += gij * zj[half + k];
            di[half + k] += gji * zj[k];
          }
        }
      } else {  // inner product
        for (int j = 0; j < n; ++j) {
          const double* zj = raw.row(j);
          double l = dot(zi, zj, d);
          if (j == i) {
            double lv, dl;
            detail::entry_loss(l, false, w, scale, lv, dl);
            acc += lv;
            for (int k = 0; k < d; ++k) di[k] += dl * 2.0 * zi[k];
            continue;
          }
          double lv, gij, lv_back, gji;
          detail::entry_loss(l, is_out[j] != 0, w, scale, lv, gij);
          detail::entry_loss(l, is_in[j] != 0, w, scale, lv_back, gji);
          acc += lv;
          double c = gij + gji;
          for (int k = 0; k < d; ++k) di[k] += c * zj[k];
        }
      }

      for (int k = g.out_offsets[i]; k < g.out_offsets[i + 1]; ++k)
        is_out[g.out_targets[k]] = 0;
      for (int k = g.in_offsets[i]; k < g.in_offsets[i + 1]; ++k)
        is_in[g.in_sources[k]] = 0;
    }
    partial[chunk] = acc;
  });
  for (double p : partial) out.value += p;
  return out;
}

// ---------------------------------------------------------------------------
// GCN encoder
// ---------------------------------------------------------------------------
//
// Two-layer graph convolution with out-degree normalized propagation:
//   H = relu(A_hat X W0),  Out = A_hat H W1
// Featureless graphs use X = I, which turns the first layer into A_hat W0.
// The variational encoder shares the trunk (or keeps two, see share_hidden)
// and emits mu and log_sigma through separate second-layer heads.

struct GcnDims {
  int in_dim = 0;   // n for featureless input
  int hidden = 64;
  int out = 33;     // latent width; gravity decoders add the mass column here
  bool variational = false;
  bool share_hidden = true;

  void check() const {
    if (in_dim <= 0 || hidden <= 0 || out <= 0)
      throw std::invalid_argument("GcnDims: dimensions must be positive");
  }
};

struct GcnParams {
  GcnDims dims;
  DenseMatrix w0;            // in_dim x hidden (mu trunk when not shared)
  DenseMatrix w0_sigma;      // in_dim x hidden, only when variational and not shared
  DenseMatrix w1;            // hidden x out, plain autoencoder head
  DenseMatrix w1_mu;         // hidden x out, variational heads
  DenseMatrix w1_log_sigma;

  // Fixed iteration order for optimizers, serialization, and flattening.
  std::vector<DenseMatrix*> matrices() {
    std::vector<DenseMatrix*> v{&w0};
    if (dims.variational) {
      if (!dims.share_hidden) v.push_back(&w0_sigma);
      v.push_back(&w1_mu);
      v.push_back(&w1_log_sigma);
    } else {
      v.push_back(&w1);
    }
    return v;
  }
  std::vector<const DenseMatrix*> matrices() const {
    auto v = const_cast<GcnParams*>(this)->matrices();
    return {v.begin(), v.end()};
  }

  std::vector<double> flatten() const {
    std::vector<double> out;
    for (const DenseMatrix* m : matrices())
      out.insert(out.end(), m->data.begin(), m->data.end());
    return out;
  }
  void unflatten(const std::vector<double>& flat) {
    std::size_t pos = 0;
    for (DenseMatrix* m : matrices()) {
      if (pos + m->data.size() > flat.size())
        throw std::invalid_argument("unflatten: size mismatch");
      std::memcpy(m->data.data(), flat.data() + pos, m->data.size() * sizeof(double));
      pos += m->data.size();
    }
    if (pos != flat.size()) throw std::invalid_argument("unflatten: size mismatch");
  }
};

namespace detail {

inline void glorot_fill(DenseMatrix& m, Rng& rng) {
  double limit = std::sqrt(6.0 / (m.rows + m.cols));
  for (double& v : m.data) v = rng.uniform(-limit, limit);
}

}  // namespace detail

inline GcnParams init_params(const GcnDims& dims, Rng& rng) {
  dims.check();
  GcnParams p;
  p.dims = dims;
  p.w0 = DenseMatrix(dims.in_dim, dims.hidden);
  detail::glorot_fill(p.w0, rng);
  if (dims.variational) {
    if (!dims.share_hidden) {
      p.w0_sigma = DenseMatrix(dims.in_dim, dims.hidden);
      detail::glorot_fill(p.w0_sigma, rng);
    }
    p.w1_mu = DenseMatrix(dims.hidden, dims.out);
    detail::glorot_fill(p.w1_mu, rng);
    p.w1_log_sigma = DenseMatrix(dims.hidden, dims.out);
    detail::glorot_fill(p.w1_log_sigma, rng);
  } else {
    p.w1 = DenseMatrix(dims.hidden, dims.out);
    detail::glorot_fill(p.w1, rng);
  }
  return p;
}

struct GaussianPosterior {
  DenseMatrix mu;
  DenseMatrix log_sigma;
};

// Forward activations kept for the backward pass. The *_sigma members are
// used only with a separate variational trunk.
struct EncoderCache {
  DenseMatrix pre_act, hidden_prop;
  DenseMatrix pre_act_sigma, hidden_prop_sigma;
};

namespace detail {

// One trunk: pre = A_hat (X W0), prop = A_hat relu(pre).
inline void trunk_forward(const SparseRowMatrix& adj,
                          const std::optional<DenseMatrix>& x, const DenseMatrix& w0,
                          DenseMatrix& pre, DenseMatrix& prop) {
  pre = x ? spmm(adj, matmul(*x, w0)) : spmm(adj, w0);
  prop = spmm(adj, relu(pre));
}

// Gradient of a trunk given d(prop); returns dW0.
inline DenseMatrix trunk_backward(const SparseRowMatrix& adj_t,
                                  const std::optional<DenseMatrix>& x,
                                  const DenseMatrix& pre, const DenseMatrix& dprop) {
  DenseMatrix dhidden = spmm(adj_t, dprop);
  DenseMatrix dpre = relu_backward(pre, dhidden);
  DenseMatrix dinput = spmm(adj_t, dpre);
  return x ? matmul_trans_a(*x, dinput) : dinput;
}

}  // namespace detail

inline DenseMatrix gcn_forward(const SparseRowMatrix& adj,
                               const std::optional<DenseMatrix>& x,
                               const GcnParams& p, EncoderCache* cache = nullptr) {
  if (p.dims.variational)
    throw std::invalid_argument("gcn_forward: variational params, use gcn_forward_vae");
  EncoderCache local;
  EncoderCache& c = cache ? *cache : local;
  detail::trunk_forward(adj, x, p.w0, c.pre_act, c.hidden_prop);
  return matmul(c.hidden_prop, p.w1);
}

inline GaussianPosterior gcn_forward_vae(const SparseRowMatrix& adj,
                                         const std::optional<DenseMatrix>& x,
                                         const GcnParams& p,
                                         EncoderCache* cache = nullptr) {
  if (!p.dims.variational)
    throw std::invalid_argument("gcn_forward_vae: non-variational params");
  EncoderCache local;
  EncoderCache& c = cache ? *cache : local;
  detail::trunk_forward(adj, x, p.w0, c.pre_act, c.hidden_prop);
  GaussianPosterior q;
  q.mu = matmul(c.hidden_prop, p.w1_mu);
  if (p.dims.share_hidden) {
    q.log_sigma = matmul(c.hidden_prop, p.w1_log_sigma);
  } else {
    detail::trunk_forward(adj, x, p.w0_sigma, c.pre_act_sigma, c.hidden_prop_sigma);
    q.log_sigma = matmul(c.hidden_prop_sigma, p.w1_log_sigma);
  }
  return q;
}

// Backpropagation through the plain autoencoder given d(output).
inline GcnParams gcn_backward(const SparseRowMatrix& adj_t,
                              const std::optional<DenseMatrix>& x, const GcnParams& p,
                              const EncoderCache& c, const DenseMatrix& dout) {
  GcnParams g;
  g.dims = p.dims;
  g.w1 = matmul_trans_a(c.hidden_prop, dout);
  DenseMatrix dprop = matmul_trans_b(dout, p.w1);
  g.w0 = detail::trunk_backward(adj_t, x, c.pre_act, dprop);
  return g;
}

// Backpropagation through the variational encoder given d(mu), d(log_sigma).
inline GcnParams gcn_backward_vae(const SparseRowMatrix& adj_t,
                                  const std::optional<DenseMatrix>& x,
                                  const GcnParams& p, const EncoderCache& c,
                                  const DenseMatrix& dmu, const DenseMatrix& dls) {
  GcnParams g;
  g.dims = p.dims;
  g.w1_mu = matmul_trans_a(c.hidden_prop, dmu);
  if (p.dims.share_hidden) {
    g.w1_log_sigma = matmul_trans_a(c.hidden_prop, dls);
    DenseMatrix dprop = matmul_trans_b(dmu, p.w1_mu);
    DenseMatrix dprop_s = matmul_trans_b(dls, p.w1_log_sigma);
    for (std::size_t k = 0; k < dprop.data.size(); ++k)
      dprop.data[k] += dprop_s.data[k];
    g.w0 = detail::trunk_backward(adj_t, x, c.pre_act, dprop);
  } else {
    g.w1_log_sigma = matmul_trans_a(c.hidden_prop_sigma, dls);
    DenseMatrix dprop = matmul_trans_b(dmu, p.w1_mu);
    g.w0 = detail::trunk_backward(adj_t, x, c.pre_act, dprop);
    DenseMatrix dprop_s = matmul_trans_b(dls, p.w1_log_sigma);
    g.w0_sigma = detail::trunk_backward(adj_t, x, c.pre_act_sigma, dprop_s);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Variational objective
// ---------------------------------------------------------------------------

// KL(q || N(0, I)) summed over nodes and dimensions:
//   0.5 * sum (sigma^2 + mu^2 - 1 - log sigma^2)
inline double kl_normal(const GaussianPosterior& q) {
  check_shape(q.mu.same_shape(q.log_sigma), "kl_normal");
  double kl = 0.0;
  for (std::size_t k = 0; k < q.mu.data.size(); ++k) {
    double mu = q.mu.data[k], s = q.log_sigma.data[k];
    kl += 0.5 * (std::exp(2.0 * s) + mu * mu - 1.0 - 2.0 * s);
  }
  return kl;
}

struct ElboResult {
  double elbo = 0.0;       // -recon_loss - kl / n^2
  double recon_loss = 0.0;
  double kl = 0.0;         // total KL, before the 1/n^2 scaling
  DenseMatrix d_mu;        // gradients of the ELBO itself
  DenseMatrix d_log_sigma;
};

// Single-sample reparameterized ELBO: sample = mu + exp(log_sigma) * noise.
// The noise matrix is an explicit argument so gradients can be checked with
// it held fixed.
inline ElboResult elbo(const GaussianPosterior& q, const DenseMatrix& noise,
                       const DecoderConfig& cfg, const DirectedGraph& g) {
  check_shape(q.mu.same_shape(q.log_sigma), "elbo posterior");
  check_shape(q.mu.same_shape(noise), "elbo noise");
  int n = q.mu.rows;
  DenseMatrix sample = q.mu;
  for (std::size_t k = 0; k < sample.data.size(); ++k)
    sample.data[k] += std::exp(q.log_sigma.data[k]) * noise.data[k];

  DecodeLoss rec = reconstruction_loss_fused(sample, cfg, g);
  ElboResult out;
  out.recon_loss = rec.value;
  out.kl = kl_normal(q);
  // The KL is scaled by 1/n^2 so it lives on the same scale as the
  // reconstruction term, itself a mean over the n^2 pair losses. Scaling by
  // 1/n instead lets the prior overwhelm the data term as graphs grow.
  double inv = 1.0 / (static_cast<double>(n) * n);
  out.elbo = -rec.value - out.kl * inv;

  out.d_mu = DenseMatrix(q.mu.rows, q.mu.cols);
  out.d_log_sigma = DenseMatrix(q.mu.rows, q.mu.cols);
  for (std::size_t k = 0; k < sample.data.size(); ++k) {
    double sig = std::exp(q.log_sigma.data[k]);
    double dsample = rec.d_raw.data[k];
    out.d_mu.data[k] = -dsample - inv * q.mu.data[k];
    out.d_log_sigma.data[k] =
        -dsample * noise.data[k] * sig - inv * (sig * sig - 1.0);
  }
  return out;
}

}  // namespace gravae
