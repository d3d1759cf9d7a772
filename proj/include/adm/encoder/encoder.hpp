// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scene encoder: per-agent local embeddings from agent-agent and agent-lane
// cross-attention followed by a temporal GRU, then global attention across
// the agents of each scenario with relative-pose edge conditioning.

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adm/diffcore/nn.hpp"
#include "adm/scene/geometry.hpp"

namespace adm::enc {

struct EncoderConfig {
  int dim = 128;
  int heads = 8;
  int gru_layers = 4;
  int global_layers = 3;
  int token_hidden = 64;  // width of the token-embedding MLPs
  int ffn_hidden = 256;
  double radius = 50.0;
  int max_neighbors = 8;
  int max_lanes = 48;
  double lane_segment_length = 2.0;
};

nlohmann::json to_json(const EncoderConfig& c);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

inline constexpr int kMotionFeatures = 2;
inline constexpr int kNeighborFeatures = 4;
inline constexpr int kLaneFeatures = 10;
inline constexpr int kEdgeFeatures = 4;

struct AgentRef {
  std::size_t scenario = 0;
  std::size_t agent = 0;
};

// Featurized batch of scenarios. Agents of all scenarios are stacked into
// one batch of N rows in scenario order; every feature is expressed in the
// owning agent's frame.
struct EncoderInputs {
  std::int64_t agents = 0;  // N
  std::int64_t neighbor_slots = 0;  // M
  std::int64_t lane_slots = 0;      // L
  std::int64_t group_size = 0;      // A, max agents per scenario
  std::vector<AgentRef> refs;
  std::vector<scene::AgentFrame> frames;
  dc::Tensor motion;    // [N, 20, 2] displacements, zero at t = 0
  dc::Tensor neighbor;  // [N, M * 20, 4] slot-major: row m * 20 + t
  dc::Tensor lanes;     // [N, L, 10]
  std::shared_ptr<dc::AttentionMask> local_mask;  // [N, 20, M * 20 + L]
  std::vector<std::int64_t> group_index;          // [N * A] rows of the batch
  dc::Tensor edges;                               // [N, A, 4]
  std::shared_ptr<dc::AttentionMask> global_mask; // [N, 1, A]
};

EncoderInputs build_encoder_inputs(std::span<const scene::Scenario> scenarios, const EncoderConfig& config);

struct Embeddings {
  dc::Tensor local;   // D_L [N, D]
  dc::Tensor global;  // D_G [N, D]
};

// Concatenation followed by one linear layer, [N, D] x 2 -> [N, out].
class Aggregator {
 public:
  Aggregator() = default;
  Aggregator(dc::ParamStore& store, const std::string& name, std::int64_t dim, std::int64_t out, dc::Rng& rng);

  dc::Tensor operator()(const dc::Tensor& d_local, const dc::Tensor& d_global) const;
  const dc::Linear& linear() const { return linear_; }

 private:
  dc::Linear linear_;
};

class SceneEncoder {
 public:
  SceneEncoder(dc::ParamStore& store, const std::string& name, const EncoderConfig& config, dc::Rng& rng);

  dc::Tensor encode_local(const EncoderInputs& in) const;
  dc::Tensor encode_global(const dc::Tensor& d_local, const EncoderInputs& in) const;
  Embeddings encode(const EncoderInputs& in) const;

  const EncoderConfig& config() const { return config_; }

 private:
  struct GlobalLayer {
    dc::Linear edge_in;
    dc::Linear edge_key;
    dc::Linear edge_value;
    dc::MultiHeadAttention attention;
    dc::LayerNorm norm_attn;
    dc::FeedForward ffn;
    dc::LayerNorm norm_ffn;
  };

  EncoderConfig config_;
  dc::Mlp motion_embed_;
  dc::Mlp neighbor_embed_;
  dc::Mlp lane_embed_;
  dc::MultiHeadAttention interaction_;
  dc::LayerNorm norm_interaction_;
  dc::FeedForward ffn_local_;
  dc::LayerNorm norm_ffn_local_;
  dc::Gru temporal_;
  dc::LayerNorm norm_local_out_;
  std::vector<GlobalLayer> global_;
};

}  // namespace adm::enc
