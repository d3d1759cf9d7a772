// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/model/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "adm/scene/synthetic.hpp"

namespace adm::model {

using dc::Tensor;

PriorKind parse_prior_kind(std::string_view name) {
  if (name == "estimator") return PriorKind::kEstimator;
  if (name == "mlp") return PriorKind::kMlp;
  if (name == "none") return PriorKind::kNone;
  throw std::invalid_argument("unknown prior variant '" + std::string(name) + "' (estimator|mlp|none)");
}

std::string to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::kEstimator: return "estimator";
    case PriorKind::kMlp: return "mlp";
    case PriorKind::kNone: return "none";
  }
  return "?";
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"encoder", enc::to_json(c.encoder)},
          {"denoiser", diff::to_json(c.denoiser)},
          {"estimator", est::to_json(c.estimator)},
          {"prior", to_string(c.prior)},
          {"diffusion_steps", c.diffusion_steps},
          {"position_scale", c.position_scale},
          {"init_seed", c.init_seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  if (j.contains("encoder")) c.encoder = enc::encoder_config_from_json(j["encoder"]);
  if (j.contains("denoiser")) c.denoiser = diff::denoiser_config_from_json(j["denoiser"]);
  if (j.contains("estimator")) c.estimator = est::estimator_config_from_json(j["estimator"]);
  c.prior = parse_prior_kind(j.value("prior", to_string(c.prior)));
  c.diffusion_steps = j.value("diffusion_steps", c.diffusion_steps);
  c.position_scale = j.value("position_scale", c.position_scale);
  c.init_seed = j.value("init_seed", c.init_seed);
  if (c.position_scale <= 0.0) throw std::invalid_argument("position_scale must be positive");
  return c;
}

namespace {

// The denoiser and estimator widths are tied to the encoder width.
ModelConfig harmonize(ModelConfig c) {
  c.denoiser.cond_dim = c.encoder.dim;
  c.denoiser.future_steps = scene::kFutureSteps;
  c.estimator.dim = c.encoder.dim;
  c.estimator.future_steps = scene::kFutureSteps;
  return c;
}

dc::Rng& seeded(dc::Rng& rng, std::uint64_t seed) {
  rng.seed(seed);
  return rng;
}

}  // namespace

// Each component draws from its own stream so that adding or removing a
// prior variant leaves the other initial weights unchanged.
AdmModel::AdmModel(const ModelConfig& config)
    : config_(harmonize(config)),
      schedule_(diff::make_schedule(config.diffusion_steps)),
      condition_([&] {
        dc::Rng rng;
        return enc::Aggregator(store_, "condition", config_.encoder.dim, config_.encoder.dim,
                               seeded(rng, scene::mix_seed(config_.init_seed, 2)));
      }()),
      denoiser_([&] {
        dc::Rng rng;
        return diff::Denoiser(store_, "denoiser", config_.denoiser, seeded(rng, scene::mix_seed(config_.init_seed, 3)));
      }()),
      heads_([&] {
        dc::Rng rng;
        return est::ModeHeadPredictor(store_, "heads", config_.estimator,
                                      seeded(rng, scene::mix_seed(config_.init_seed, 5)));
      }()) {
  dc::Rng rng;
  encoder_ = std::make_unique<enc::SceneEncoder>(store_, "encoder", config_.encoder,
                                                 seeded(rng, scene::mix_seed(config_.init_seed, 1)));
  switch (config_.prior) {
    case PriorKind::kEstimator:
      estimator_.emplace(store_, "estimator", config_.estimator, seeded(rng, scene::mix_seed(config_.init_seed, 4)));
      break;
    case PriorKind::kMlp:
      mlp_prior_.emplace(store_, "mlp_prior", config_.estimator, seeded(rng, scene::mix_seed(config_.init_seed, 4)));
      break;
    case PriorKind::kNone:
      break;
  }
}

EncodedBatch AdmModel::encode(std::span<const scene::Scenario> scenarios) const {
  EncodedBatch b;
  b.inputs = enc::build_encoder_inputs(scenarios, config_.encoder);
  b.embeddings = encoder_->encode(b.inputs);
  b.condition = condition(b.embeddings);
  return b;
}

Tensor AdmModel::prior(const enc::Embeddings& e) const {
  if (estimator_) return estimator_->prior(e.local, e.global);
  if (mlp_prior_) return (*mlp_prior_)(e.local, e.global);
  throw std::logic_error("model has no prior network (variant 'none')");
}

const est::MotionPatternEstimator& AdmModel::estimator() const {
  if (!estimator_) throw std::logic_error("model variant '" + to_string(config_.prior) + "' has no estimator");
  return *estimator_;
}

std::int64_t AdmModel::prior_parameter_count() const {
  switch (config_.prior) {
    case PriorKind::kEstimator: return store_.scalar_count(kEstimatorPrefix);
    case PriorKind::kMlp: return store_.scalar_count(kMlpPriorPrefix);
    case PriorKind::kNone: return 0;
  }
  return 0;
}

void AdmModel::save(const std::filesystem::path& path, const nlohmann::json& extra_meta) const {
  nlohmann::json meta = extra_meta;
  meta["config"] = to_json(config_);
  dc::save_checkpoint(store_, path, meta);
}

void transfer_backbone(const AdmModel& from, AdmModel& to) {
  for (const auto& e : from.params().entries()) {
    const std::string_view name = e.name;
    if (!name.starts_with(kEncoderPrefix) && !name.starts_with(kConditionPrefix) &&
        !name.starts_with(kDenoiserPrefix)) {
      continue;
    }
    if (!to.params().contains(name) || to.params().at(name).shape() != e.param.shape()) {
      throw dc::CheckpointError("transfer_backbone: '" + e.name + "' missing or reshaped in the target model");
    }
    const auto src = e.param.values();
    std::copy(src.begin(), src.end(), to.params().at(name).mutable_values().begin());
  }
}

LoadedModel load_model(const std::filesystem::path& path) {
  auto data = dc::read_checkpoint(path);
  if (!data.meta.contains("config")) {
    throw dc::CheckpointError(path.string() + ": checkpoint has no model configuration");
  }
  LoadedModel out;
  try {
    out.model = std::make_unique<AdmModel>(model_config_from_json(data.meta["config"]));
  } catch (const std::exception& e) {
    throw dc::CheckpointError(path.string() + ": bad model configuration: " + e.what());
  }
  dc::load_into(out.model->params(), data);
  out.stage = data.meta.value("stage", 0);
  out.meta = std::move(data.meta);
  return out;
}

Tensor future_targets(std::span<const scene::Scenario> scenarios, const enc::EncoderInputs& inputs,
                      double position_scale) {
  constexpr std::int64_t kT = scene::kFutureSteps;
  std::vector<double> v(static_cast<std::size_t>(inputs.agents * kT * 2));
  for (std::int64_t r = 0; r < inputs.agents; ++r) {
    const auto& ref = inputs.refs[static_cast<std::size_t>(r)];
    const auto& sc = scenarios[ref.scenario];
    const auto& agent = sc.agents[ref.agent];
    if (!agent.future) {
      throw scene::DataError("scenario " + sc.scenario_id + ", agent " + agent.id + ": no ground-truth future");
    }
    const auto& frame = inputs.frames[static_cast<std::size_t>(r)];
    for (std::int64_t t = 0; t < kT; ++t) {
      const auto p = frame.to_local((*agent.future)[static_cast<std::size_t>(t)]);
      v[static_cast<std::size_t>((r * kT + t) * 2)] = p.x / position_scale;
      v[static_cast<std::size_t>((r * kT + t) * 2 + 1)] = p.y / position_scale;
    }
  }
  return Tensor::from_vector({inputs.agents, kT, 2}, std::move(v));
}

std::vector<std::vector<std::vector<scene::Vec2>>> to_global(const Tensor& trajectories,
                                                              const enc::EncoderInputs& inputs,
                                                              double position_scale) {
  if (trajectories.rank() != 4 || trajectories.dim(0) != inputs.agents || trajectories.dim(2) != 2) {
    throw dc::ShapeError("to_global: expected [N, T_f, 2, K], got " + dc::to_string(trajectories.shape()));
  }
  const auto steps = trajectories.dim(1);
  const auto modes = trajectories.dim(3);
  const auto vals = trajectories.values();
  std::vector<std::vector<std::vector<scene::Vec2>>> out(static_cast<std::size_t>(inputs.agents));
  for (std::int64_t r = 0; r < inputs.agents; ++r) {
    const auto& frame = inputs.frames[static_cast<std::size_t>(r)];
    auto& row = out[static_cast<std::size_t>(r)];
    row.assign(static_cast<std::size_t>(modes), std::vector<scene::Vec2>(static_cast<std::size_t>(steps)));
    for (std::int64_t t = 0; t < steps; ++t) {
      for (std::int64_t k = 0; k < modes; ++k) {
        const auto base = ((r * steps + t) * 2) * modes + k;
        const scene::Vec2 local{vals[static_cast<std::size_t>(base)] * position_scale,
                                vals[static_cast<std::size_t>(base + modes)] * position_scale};
        row[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)] = frame.to_global(local);
      }
    }
  }
  return out;
}

}  // namespace adm::model
