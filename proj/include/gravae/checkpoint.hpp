#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gravae/models.hpp"
#include "gravae/training.hpp"

namespace gravae {

// Checkpoint layout: 8-byte magic, little-endian u64 header length, JSON
// header (model kind, dims, decoder settings, seed, parameter count), then
// the flattened parameters as raw little-endian doubles.
inline constexpr char kCheckpointMagic[8] = {'G', 'R', 'A', 'V', 'A', 'E', '0', '1'};

struct Checkpoint {
  TrainConfig config;
  GcnDims dims;
  std::vector<double> values;

  GcnParams materialize() const {
    GcnParams p;
    p.dims = dims;
    p.w0 = DenseMatrix(dims.in_dim, dims.hidden);
    if (dims.variational) {
      if (!dims.share_hidden) p.w0_sigma = DenseMatrix(dims.in_dim, dims.hidden);
      p.w1_mu = DenseMatrix(dims.hidden, dims.out);
      p.w1_log_sigma = DenseMatrix(dims.hidden, dims.out);
    } else {
      p.w1 = DenseMatrix(dims.hidden, dims.out);
    }
    p.unflatten(values);
    return p;
  }
};

inline void save_checkpoint(const GcnParams& params, const TrainConfig& cfg,
                            const std::string& path) {
  std::vector<double> flat = params.flatten();
  nlohmann::json header = {
      {"model", model_name(cfg.model)},
      {"dims",
       {{"in_dim", params.dims.in_dim},
        {"hidden", params.dims.hidden},
        {"out", params.dims.out},
        {"variational", params.dims.variational},
        {"share_hidden", params.dims.share_hidden}}},
      {"lambda", cfg.lambda},
      {"epsilon", cfg.epsilon},
      {"seed", cfg.seed},
      {"latent_dim", cfg.latent_dim},
      {"hidden_dim", cfg.hidden_dim},
      {"epochs", cfg.epochs},
      {"learning_rate", cfg.learning_rate},
      {"share_hidden", cfg.share_hidden},
      {"eval_from_mean", cfg.eval_from_mean},
      {"count", flat.size()}};
  std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  std::uint64_t hlen = htext.size();
  char lenbuf[8];
  for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<char>((hlen >> (8 * i)) & 0xff);
  out.write(lenbuf, 8);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  char lenbuf[8];
  in.read(lenbuf, 8);
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  std::uint64_t hlen = 0;
  for (int i = 0; i < 8; ++i)
    hlen |= static_cast<std::uint64_t>(static_cast<unsigned char>(lenbuf[i])) << (8 * i);
  if (hlen > (1u << 20)) throw std::runtime_error("checkpoint header too large");
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  nlohmann::json header = nlohmann::json::parse(htext);

  Checkpoint c;
  c.config.model = model_from_name(header.at("model").get<std::string>());
  c.config.lambda = header.at("lambda").get<double>();
  c.config.epsilon = header.at("epsilon").get<double>();
  c.config.seed = header.at("seed").get<std::uint64_t>();
  c.config.latent_dim = header.at("latent_dim").get<int>();
  c.config.hidden_dim = header.at("hidden_dim").get<int>();
  c.config.epochs = header.at("epochs").get<int>();
  c.config.learning_rate = header.at("learning_rate").get<double>();
  c.config.share_hidden = header.at("share_hidden").get<bool>();
  c.config.eval_from_mean = header.at("eval_from_mean").get<bool>();
  auto d = header.at("dims");
  c.dims.in_dim = d.at("in_dim").get<int>();
  c.dims.hidden = d.at("hidden").get<int>();
  c.dims.out = d.at("out").get<int>();
  c.dims.variational = d.at("variational").get<bool>();
  c.dims.share_hidden = d.at("share_hidden").get<bool>();

  std::uint64_t count = header.at("count").get<std::uint64_t>();
  c.values.resize(count);
  in.read(reinterpret_cast<char*>(c.values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in || in.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
    throw std::runtime_error("truncated checkpoint payload: " + path);
  return c;
}

}  // namespace gravae
