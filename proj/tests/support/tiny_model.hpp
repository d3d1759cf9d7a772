// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// A narrow model configuration that trains in seconds, for tests that need
// a full pipeline rather than a good predictor.

#pragma once

#include "adm/model/model.hpp"

namespace adm::testing {

inline model::ModelConfig tiny_model_config(model::PriorKind prior = model::PriorKind::kEstimator, int modes = 6) {
  model::ModelConfig c;
  c.encoder.dim = 32;
  c.encoder.heads = 4;
  c.encoder.gru_layers = 1;
  c.encoder.global_layers = 1;
  c.encoder.token_hidden = 16;
  c.encoder.ffn_hidden = 64;
  c.encoder.max_lanes = 16;
  c.encoder.max_neighbors = 4;
  c.denoiser.dim = 32;
  c.denoiser.heads = 4;
  c.denoiser.blocks = 1;
  c.denoiser.ffn_hidden = 64;
  c.estimator.modes = modes;
  c.estimator.mean_hidden = 32;
  c.estimator.node_hidden = 64;
  c.estimator.head_hidden = 32;
  c.estimator.mlp_prior_hidden = 48;
  c.prior = prior;
  c.diffusion_steps = 100;
  c.init_seed = 7;
  return c;
}

}  // namespace adm::testing
