// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/estimator/estimator.hpp"

namespace adm::est {

using dc::Tensor;

nlohmann::json to_json(const EstimatorConfig& c) {
  return {{"dim", c.dim},
          {"modes", c.modes},
          {"future_steps", c.future_steps},
          {"mean_hidden", c.mean_hidden},
          {"node_hidden", c.node_hidden},
          {"head_hidden", c.head_hidden},
          {"mlp_prior_hidden", c.mlp_prior_hidden}};
}

EstimatorConfig estimator_config_from_json(const nlohmann::json& j) {
  EstimatorConfig c;
  c.dim = j.value("dim", c.dim);
  c.modes = j.value("modes", c.modes);
  c.future_steps = j.value("future_steps", c.future_steps);
  c.mean_hidden = j.value("mean_hidden", c.mean_hidden);
  c.node_hidden = j.value("node_hidden", c.node_hidden);
  c.head_hidden = j.value("head_hidden", c.head_hidden);
  c.mlp_prior_hidden = j.value("mlp_prior_hidden", c.mlp_prior_hidden);
  if (c.modes < 1) throw std::invalid_argument("estimator: modes must be >= 1");
  return c;
}

Tensor reparameterize(const MotionPattern& p) {
  const auto n = p.mean.dim(0);
  const auto t = p.mean.dim(1);
  if (p.variance.shape() != dc::Shape{n, 1} || p.nodes.rank() != 4 || p.nodes.dim(0) != n || p.nodes.dim(1) != t ||
      p.nodes.dim(2) != 2) {
    throw dc::ShapeError("reparameterize: mean " + dc::to_string(p.mean.shape()) + ", variance " +
                         dc::to_string(p.variance.shape()) + ", nodes " + dc::to_string(p.nodes.shape()));
  }
  return dc::reshape(p.mean, {n, t, 2, 1}) + dc::reshape(p.variance, {n, 1, 1, 1}) * p.nodes;
}

MotionPatternEstimator::MotionPatternEstimator(dc::ParamStore& store, const std::string& name,
                                               const EstimatorConfig& config, dc::Rng& rng)
    : config_(config) {
  const std::int64_t d = config.dim;
  const std::int64_t out = 2 * config.future_steps;
  aggregate_ = enc::Aggregator(store, name + ".aggregate", d, d, rng);
  mean_enc_ = dc::Linear(store, name + ".mean_enc", d, d, rng);
  mean_enc_norm_ = dc::LayerNorm(store, name + ".mean_enc_norm", d);
  mean_dec_ = dc::Mlp(store, name + ".mean_dec", {d, config.mean_hidden, out}, rng);
  var_enc_ = dc::Linear(store, name + ".var_enc", d, d, rng);
  var_enc_norm_ = dc::LayerNorm(store, name + ".var_enc_norm", d);
  var_out_ = dc::Linear(store, name + ".var_out", d, 1, rng);
  node_dec_ = dc::Mlp(store, name + ".node_dec", {d + 1, config.node_hidden, config.node_hidden, out * config.modes},
                      rng);
}

Tensor MotionPatternEstimator::mean_from(const Tensor& agg) const {
  const Tensor h = dc::relu(mean_enc_norm_(mean_enc_(agg)));
  return dc::reshape(mean_dec_(h), {agg.dim(0), config_.future_steps, 2});
}

Tensor MotionPatternEstimator::variance_from(const Tensor& agg) const {
  return dc::softplus(var_out_(dc::relu(var_enc_norm_(var_enc_(agg)))));
}

Tensor MotionPatternEstimator::nodes_from(const Tensor& agg, const Tensor& variance) const {
  const Tensor flat = node_dec_(dc::concat({agg, variance}, 1));
  // Decoder rows are mode-major; move K to the last axis.
  return dc::permute(dc::reshape(flat, {agg.dim(0), config_.modes, config_.future_steps, 2}), {0, 2, 3, 1});
}

Tensor MotionPatternEstimator::estimate_mean(const Tensor& d_local, const Tensor& d_global) const {
  return mean_from(aggregate_(d_local, d_global));
}

Tensor MotionPatternEstimator::estimate_variance(const Tensor& d_local, const Tensor& d_global) const {
  return variance_from(aggregate_(d_local, d_global));
}

Tensor MotionPatternEstimator::estimate_nodes(const Tensor& d_local, const Tensor& d_global,
                                              const Tensor& variance) const {
  const Tensor agg = aggregate_(d_local, d_global);
  if (variance.shape() != dc::Shape{agg.dim(0), 1}) {
    throw dc::ShapeError("estimate_nodes: variance must be [N, 1], got " + dc::to_string(variance.shape()));
  }
  return nodes_from(agg, variance);
}

MotionPattern MotionPatternEstimator::operator()(const Tensor& d_local, const Tensor& d_global) const {
  const Tensor agg = aggregate_(d_local, d_global);
  MotionPattern p;
  p.mean = mean_from(agg);
  p.variance = variance_from(agg);
  p.nodes = nodes_from(agg, p.variance);
  return p;
}

ModeHeadPredictor::ModeHeadPredictor(dc::ParamStore& store, const std::string& name, const EstimatorConfig& config,
                                     dc::Rng& rng)
    : config_(config) {
  const std::int64_t d = config.dim;
  project_global_ = dc::Linear(store, name + ".project_global", d, d, rng);
  probability_ = dc::Mlp(store, name + ".probability", {2 * d, config.head_hidden, config.modes}, rng);
  laplace_ = dc::Mlp(store, name + ".laplace", {2 * d, config.head_hidden, 2 * config.future_steps}, rng);
}

ModeHeads ModeHeadPredictor::operator()(const Tensor& d_local, const Tensor& d_global) const {
  const Tensor x = dc::concat({d_local, project_global_(d_global)}, 1);
  ModeHeads h;
  h.logits = probability_(x);
  h.probabilities = dc::softmax(h.logits);
  h.laplace_scale =
      dc::reshape(dc::softplus(laplace_(x)) + kMinLaplaceScale, {d_local.dim(0), config_.future_steps, 2});
  return h;
}

MlpPrior::MlpPrior(dc::ParamStore& store, const std::string& name, const EstimatorConfig& config, dc::Rng& rng)
    : config_(config),
      mlp_(store, name, {2 * config.dim, config.mlp_prior_hidden, 2 * config.future_steps * config.modes}, rng) {}

Tensor MlpPrior::operator()(const Tensor& d_local, const Tensor& d_global) const {
  const Tensor flat = mlp_(dc::concat({d_local, d_global}, 1));
  return dc::permute(dc::reshape(flat, {d_local.dim(0), config_.modes, config_.future_steps, 2}), {0, 2, 3, 1});
}

}  // namespace adm::est
