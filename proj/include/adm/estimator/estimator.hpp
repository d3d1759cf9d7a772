// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Motion pattern estimator: a mean trajectory, one spread scalar and K
// navigation nodes per agent, combined into K prior trajectories that stand
// in for a partially denoised sample. Also the mode probability and Laplace
// scale heads, and the plain MLP decoder used as an ablation baseline.

#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "adm/diffcore/nn.hpp"
#include "adm/encoder/encoder.hpp"

namespace adm::est {

struct EstimatorConfig {
  int dim = 128;            // embedding width of D_L and D_G
  int modes = 6;            // K
  int future_steps = 30;
  int mean_hidden = 128;    // hidden width of the mean decoder
  int node_hidden = 1000;   // hidden width of the node decoder
  int head_hidden = 128;    // hidden width of the probability and scale heads
  int mlp_prior_hidden = 384;
};

nlohmann::json to_json(const EstimatorConfig& c);
EstimatorConfig estimator_config_from_json(const nlohmann::json& j);

struct MotionPattern {
  dc::Tensor mean;      // [N, T_f, 2]
  dc::Tensor variance;  // [N, 1], positive
  dc::Tensor nodes;     // [N, T_f, 2, K]
};

struct ModeHeads {
  dc::Tensor logits;         // [N, K]
  dc::Tensor probabilities;  // softmax of logits
  dc::Tensor laplace_scale;  // [N, T_f, 2], positive
};

// prior[:, t, d, k] = mean[:, t, d] + variance[:, 0] * nodes[:, t, d, k]
dc::Tensor reparameterize(const MotionPattern& pattern);

class MotionPatternEstimator {
 public:
  MotionPatternEstimator(dc::ParamStore& store, const std::string& name, const EstimatorConfig& config, dc::Rng& rng);

  dc::Tensor estimate_mean(const dc::Tensor& d_local, const dc::Tensor& d_global) const;
  dc::Tensor estimate_variance(const dc::Tensor& d_local, const dc::Tensor& d_global) const;
  dc::Tensor estimate_nodes(const dc::Tensor& d_local, const dc::Tensor& d_global, const dc::Tensor& variance) const;

  // All three outputs from one aggregation pass.
  MotionPattern operator()(const dc::Tensor& d_local, const dc::Tensor& d_global) const;
  dc::Tensor prior(const dc::Tensor& d_local, const dc::Tensor& d_global) const {
    return reparameterize((*this)(d_local, d_global));
  }

  const EstimatorConfig& config() const { return config_; }

 private:
  dc::Tensor mean_from(const dc::Tensor& agg) const;
  dc::Tensor variance_from(const dc::Tensor& agg) const;
  dc::Tensor nodes_from(const dc::Tensor& agg, const dc::Tensor& variance) const;

  EstimatorConfig config_;
  enc::Aggregator aggregate_;
  dc::Linear mean_enc_;
  dc::LayerNorm mean_enc_norm_;
  dc::Mlp mean_dec_;
  dc::Linear var_enc_;
  dc::LayerNorm var_enc_norm_;
  dc::Linear var_out_;
  dc::Mlp node_dec_;
};

class ModeHeadPredictor {
 public:
  ModeHeadPredictor(dc::ParamStore& store, const std::string& name, const EstimatorConfig& config, dc::Rng& rng);

  ModeHeads operator()(const dc::Tensor& d_local, const dc::Tensor& d_global) const;

 private:
  EstimatorConfig config_;
  dc::Linear project_global_;
  dc::Mlp probability_;
  dc::Mlp laplace_;
};

// Ablation decoder: concat(D_L, D_G) -> K trajectories through one hidden layer.
class MlpPrior {
 public:
  MlpPrior(dc::ParamStore& store, const std::string& name, const EstimatorConfig& config, dc::Rng& rng);

  dc::Tensor operator()(const dc::Tensor& d_local, const dc::Tensor& d_global) const;

 private:
  EstimatorConfig config_;
  dc::Mlp mlp_;
};

// Lower bound added to the softplus Laplace scale so log(2b) stays finite.
inline constexpr double kMinLaplaceScale = 1e-3;

}  // namespace adm::est
