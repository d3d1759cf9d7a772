// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/encoder/encoder.hpp"

namespace adm::enc {

using dc::Tensor;

Aggregator::Aggregator(dc::ParamStore& store, const std::string& name, std::int64_t dim, std::int64_t out,
                       dc::Rng& rng)
    : linear_(store, name, 2 * dim, out, rng) {}

Tensor Aggregator::operator()(const Tensor& d_local, const Tensor& d_global) const {
  if (d_local.shape() != d_global.shape() || d_local.rank() != 2) {
    throw dc::ShapeError("aggregate: embeddings must share shape [N, D], got " + dc::to_string(d_local.shape()) +
                         " and " + dc::to_string(d_global.shape()));
  }
  return linear_(dc::concat({d_local, d_global}, 1));
}

SceneEncoder::SceneEncoder(dc::ParamStore& store, const std::string& name, const EncoderConfig& config, dc::Rng& rng)
    : config_(config) {
  const std::int64_t d = config.dim;
  const std::int64_t h = config.token_hidden;
  motion_embed_ = dc::Mlp(store, name + ".motion_embed", {kMotionFeatures, h, d}, rng);
  neighbor_embed_ = dc::Mlp(store, name + ".neighbor_embed", {kNeighborFeatures, h, d}, rng);
  lane_embed_ = dc::Mlp(store, name + ".lane_embed", {kLaneFeatures, h, d}, rng);
  interaction_ = dc::MultiHeadAttention(store, name + ".interaction", d, config.heads, rng);
  norm_interaction_ = dc::LayerNorm(store, name + ".interaction_norm", d);
  ffn_local_ = dc::FeedForward(store, name + ".local_ffn", d, config.ffn_hidden, rng);
  norm_ffn_local_ = dc::LayerNorm(store, name + ".local_ffn_norm", d);
  temporal_ = dc::Gru(store, name + ".temporal", d, d, config.gru_layers, rng);
  norm_local_out_ = dc::LayerNorm(store, name + ".local_out_norm", d);
  for (int l = 0; l < config.global_layers; ++l) {
    const std::string p = name + ".global" + std::to_string(l);
    GlobalLayer g;
    g.edge_in = dc::Linear(store, p + ".edge_in", kEdgeFeatures, h, rng);
    g.edge_key = dc::Linear(store, p + ".edge_key", h, d, rng);
    g.edge_value = dc::Linear(store, p + ".edge_value", h, d, rng);
    g.attention = dc::MultiHeadAttention(store, p + ".attention", d, config.heads, rng);
    g.norm_attn = dc::LayerNorm(store, p + ".attention_norm", d);
    g.ffn = dc::FeedForward(store, p + ".ffn", d, config.ffn_hidden, rng);
    g.norm_ffn = dc::LayerNorm(store, p + ".ffn_norm", d);
    global_.push_back(std::move(g));
  }
}

Tensor SceneEncoder::encode_local(const EncoderInputs& in) const {
  const std::int64_t n = in.agents;
  const std::int64_t d = config_.dim;
  const std::int64_t steps = in.motion.dim(1);
  Tensor tokens = motion_embed_(in.motion);
  Tensor context = dc::concat({neighbor_embed_(in.neighbor), lane_embed_(in.lanes)}, 1);
  Tensor h = norm_interaction_(tokens + interaction_(tokens, context, in.local_mask));
  h = norm_ffn_local_(h + ffn_local_(h));

  Tensor by_time = dc::permute(h, {1, 0, 2});  // [T, N, D]
  std::vector<Tensor> seq;
  seq.reserve(static_cast<std::size_t>(steps));
  for (std::int64_t t = 0; t < steps; ++t) {
    seq.push_back(dc::reshape(dc::slice(by_time, 0, t, t + 1), {n, d}));
  }
  return norm_local_out_(temporal_.final_state(seq));
}

Tensor SceneEncoder::encode_global(const Tensor& d_local, const EncoderInputs& in) const {
  const std::int64_t n = in.agents;
  const std::int64_t d = config_.dim;
  Tensor h = d_local;
  for (const auto& layer : global_) {
    Tensor edge = dc::relu(layer.edge_in(in.edges));
    dc::MultiHeadAttention::Bias bias{layer.edge_key(edge), layer.edge_value(edge)};
    Tensor context = dc::reshape(dc::index_select(h, 0, in.group_index), {n, in.group_size, d});
    Tensor attended = layer.attention(dc::reshape(h, {n, 1, d}), context, in.global_mask, bias);
    h = layer.norm_attn(h + dc::reshape(attended, {n, d}));
    h = layer.norm_ffn(h + layer.ffn(h));
  }
  return h;
}

Embeddings SceneEncoder::encode(const EncoderInputs& in) const {
  Tensor local = encode_local(in);
  return {local, encode_global(local, in)};
}

}  // namespace adm::enc
