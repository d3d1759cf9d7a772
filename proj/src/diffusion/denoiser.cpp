// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/diffusion/denoiser.hpp"

#include <cmath>

namespace adm::diff {

using dc::Tensor;

nlohmann::json to_json(const DenoiserConfig& c) {
  return {{"dim", c.dim},           {"heads", c.heads},
          {"blocks", c.blocks},     {"ffn_hidden", c.ffn_hidden},
          {"future_steps", c.future_steps}, {"cond_dim", c.cond_dim}};
}

DenoiserConfig denoiser_config_from_json(const nlohmann::json& j) {
  DenoiserConfig c;
  c.dim = j.value("dim", c.dim);
  c.heads = j.value("heads", c.heads);
  c.blocks = j.value("blocks", c.blocks);
  c.ffn_hidden = j.value("ffn_hidden", c.ffn_hidden);
  c.future_steps = j.value("future_steps", c.future_steps);
  c.cond_dim = j.value("cond_dim", c.cond_dim);
  return c;
}

Tensor step_embedding(std::span<const int> taus, int dim) {
  const int half = dim / 2;
  std::vector<double> v(taus.size() * static_cast<std::size_t>(dim), 0.0);
  for (std::size_t r = 0; r < taus.size(); ++r) {
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / half);
      v[r * dim + i] = std::sin(taus[r] * freq);
      v[r * dim + half + i] = std::cos(taus[r] * freq);
    }
  }
  return Tensor::from_vector({static_cast<std::int64_t>(taus.size()), dim}, std::move(v));
}

Denoiser::Denoiser(dc::ParamStore& store, const std::string& name, const DenoiserConfig& config, dc::Rng& rng)
    : config_(config) {
  const std::int64_t d = config.dim;
  in_proj_ = dc::Linear(store, name + ".in_proj", 2, d, rng);
  position_ = store.add(name + ".position", {config.future_steps, d}, dc::Init::normal(0.02), rng);
  step_mlp_ = dc::Mlp(store, name + ".step_mlp", {d, d, d}, rng);
  cond_proj_ = dc::Linear(store, name + ".cond_proj", config.cond_dim, d, rng);
  for (int b = 0; b < config.blocks; ++b) {
    const std::string p = name + ".block" + std::to_string(b);
    Block blk;
    blk.norm_self = dc::LayerNorm(store, p + ".self_norm", d);
    blk.self_attention = dc::MultiHeadAttention(store, p + ".self_attention", d, config.heads, rng);
    blk.norm_cross = dc::LayerNorm(store, p + ".cross_norm", d);
    blk.cross_attention = dc::MultiHeadAttention(store, p + ".cross_attention", d, config.heads, rng);
    blk.norm_ffn = dc::LayerNorm(store, p + ".ffn_norm", d);
    blk.ffn = dc::FeedForward(store, p + ".ffn", d, config.ffn_hidden, rng);
    blocks_.push_back(std::move(blk));
  }
  norm_out_ = dc::LayerNorm(store, name + ".out_norm", d);
  out_proj_ = dc::Linear(store, name + ".out_proj", d, 2, rng);
}

Tensor Denoiser::operator()(const Tensor& a_tau, int tau, const Tensor& cond) const {
  std::vector<int> taus(static_cast<std::size_t>(a_tau.dim(0)), tau);
  return (*this)(a_tau, taus, cond);
}

Tensor Denoiser::operator()(const Tensor& a_tau, std::span<const int> taus, const Tensor& cond) const {
  const std::int64_t d = config_.dim;
  const std::int64_t tf = config_.future_steps;
  if (a_tau.rank() != 4 || a_tau.dim(1) != tf || a_tau.dim(2) != 2) {
    throw dc::ShapeError("denoiser: trajectories must be [N, " + std::to_string(tf) + ", 2, K], got " +
                         dc::to_string(a_tau.shape()));
  }
  const std::int64_t n = a_tau.dim(0);
  const std::int64_t k = a_tau.dim(3);
  if (static_cast<std::int64_t>(taus.size()) != n || cond.rank() != 2 || cond.dim(0) != n) {
    throw dc::ShapeError("denoiser: " + std::to_string(taus.size()) + " steps and cond " +
                         dc::to_string(cond.shape()) + " for " + std::to_string(n) + " agents");
  }
  ++invocations_;

  // Modes are independent sequences: [N, T, 2, K] -> [N * K, T, 2].
  Tensor x = dc::reshape(dc::permute(a_tau, {0, 3, 1, 2}), {n * k, tf, 2});
  std::vector<std::int64_t> per_mode(static_cast<std::size_t>(n * k));
  for (std::int64_t i = 0; i < n * k; ++i) per_mode[static_cast<std::size_t>(i)] = i / k;

  Tensor step = step_mlp_(step_embedding(taus, static_cast<int>(d)));
  Tensor step_rows = dc::reshape(dc::index_select(step, 0, per_mode), {n * k, 1, d});
  Tensor cond_rows = dc::reshape(dc::index_select(cond_proj_(cond), 0, per_mode), {n * k, 1, d});
  Tensor memory = dc::concat({cond_rows, step_rows}, 1);

  Tensor h = in_proj_(x) + position_ + step_rows;
  for (const auto& blk : blocks_) {
    Tensor q = blk.norm_self(h);
    h = h + blk.self_attention(q, q);
    h = h + blk.cross_attention(blk.norm_cross(h), memory);
    h = h + blk.ffn(blk.norm_ffn(h));
  }
  Tensor out = out_proj_(norm_out_(h));  // [N * K, T, 2]
  return dc::permute(dc::reshape(out, {n, k, tf, 2}), {0, 2, 3, 1});
}

}  // namespace adm::diff
