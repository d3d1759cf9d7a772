// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Transformer noise predictor. Each (agent, mode) trajectory is a sequence
// of T_f time tokens; tokens self-attend within their own mode and
// cross-attend to the agent's conditioning token and the step embedding.

#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adm/diffcore/nn.hpp"

namespace adm::diff {

struct DenoiserConfig {
  int dim = 128;
  int heads = 8;
  int blocks = 2;
  int ffn_hidden = 256;
  int future_steps = 30;
  int cond_dim = 128;
};

nlohmann::json to_json(const DenoiserConfig& c);
DenoiserConfig denoiser_config_from_json(const nlohmann::json& j);

// Sinusoidal embedding of integer steps, [taus.size(), dim].
dc::Tensor step_embedding(std::span<const int> taus, int dim);

class Denoiser {
 public:
  Denoiser(dc::ParamStore& store, const std::string& name, const DenoiserConfig& config, dc::Rng& rng);

  // a_tau [N, T_f, 2, K], one step per agent row, cond [N, cond_dim]
  // -> predicted noise [N, T_f, 2, K].
  dc::Tensor operator()(const dc::Tensor& a_tau, std::span<const int> taus, const dc::Tensor& cond) const;
  dc::Tensor operator()(const dc::Tensor& a_tau, int tau, const dc::Tensor& cond) const;

  const DenoiserConfig& config() const { return config_; }

  // Number of forward passes since construction or the last reset.
  std::int64_t invocations() const { return invocations_; }
  void reset_invocations() const { invocations_ = 0; }

 private:
  struct Block {
    dc::LayerNorm norm_self;
    dc::MultiHeadAttention self_attention;
    dc::LayerNorm norm_cross;
    dc::MultiHeadAttention cross_attention;
    dc::LayerNorm norm_ffn;
    dc::FeedForward ffn;
  };

  DenoiserConfig config_;
  dc::Linear in_proj_;
  dc::Tensor position_;  // [T_f, dim]
  dc::Mlp step_mlp_;
  dc::Linear cond_proj_;
  std::vector<Block> blocks_;
  dc::LayerNorm norm_out_;
  dc::Linear out_proj_;
  mutable std::int64_t invocations_ = 0;
};

}  // namespace adm::diff
