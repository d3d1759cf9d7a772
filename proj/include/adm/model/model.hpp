// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Full predictor: scene encoder, conditioning aggregator, denoiser, prior
// decoder and mode heads in one parameter store, plus the conversions
// between scene coordinates and the normalized agent-frame trajectories the
// networks operate on.

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "adm/diffcore/checkpoint.hpp"
#include "adm/diffusion/denoiser.hpp"
#include "adm/diffusion/schedule.hpp"
#include "adm/encoder/encoder.hpp"
#include "adm/estimator/estimator.hpp"

namespace adm::model {

// Which network produces the starting trajectories of the short reverse chain.
enum class PriorKind { kEstimator, kMlp, kNone };

PriorKind parse_prior_kind(std::string_view name);
std::string to_string(PriorKind kind);

struct ModelConfig {
  enc::EncoderConfig encoder;
  diff::DenoiserConfig denoiser;
  est::EstimatorConfig estimator;
  PriorKind prior = PriorKind::kEstimator;
  int diffusion_steps = 1000;   // T
  double position_scale = 20.0; // meters per normalized unit
  std::uint64_t init_seed = 1;

  int modes() const { return estimator.modes; }
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Parameter name prefixes. Stage 2 freezes the first three.
inline constexpr std::string_view kEncoderPrefix = "encoder.";
inline constexpr std::string_view kConditionPrefix = "condition.";
inline constexpr std::string_view kDenoiserPrefix = "denoiser.";
inline constexpr std::string_view kEstimatorPrefix = "estimator.";
inline constexpr std::string_view kMlpPriorPrefix = "mlp_prior.";
inline constexpr std::string_view kHeadsPrefix = "heads.";

struct EncodedBatch {
  enc::EncoderInputs inputs;
  enc::Embeddings embeddings;
  dc::Tensor condition;  // [N, cond_dim]
};

class AdmModel {
 public:
  explicit AdmModel(const ModelConfig& config);
  AdmModel(const AdmModel&) = delete;
  AdmModel& operator=(const AdmModel&) = delete;

  const ModelConfig& config() const { return config_; }
  dc::ParamStore& params() { return store_; }
  const dc::ParamStore& params() const { return store_; }
  const diff::NoiseSchedule& schedule() const { return schedule_; }

  EncodedBatch encode(std::span<const scene::Scenario> scenarios) const;
  dc::Tensor condition(const enc::Embeddings& e) const { return condition_(e.local, e.global); }

  const diff::Denoiser& denoiser() const { return denoiser_; }
  // Starting trajectories [N, T_f, 2, K] from the configured prior network.
  // Throws for PriorKind::kNone.
  dc::Tensor prior(const enc::Embeddings& e) const;
  const est::MotionPatternEstimator& estimator() const;
  est::ModeHeads heads(const enc::Embeddings& e) const { return heads_(e.local, e.global); }

  // Parameters owned by the prior network alone (introspected).
  std::int64_t prior_parameter_count() const;

  void save(const std::filesystem::path& path, const nlohmann::json& extra_meta = nlohmann::json::object()) const;

 private:
  ModelConfig config_;
  dc::ParamStore store_;
  diff::NoiseSchedule schedule_;
  std::unique_ptr<enc::SceneEncoder> encoder_;
  enc::Aggregator condition_;
  diff::Denoiser denoiser_;
  std::optional<est::MotionPatternEstimator> estimator_;
  std::optional<est::MlpPrior> mlp_prior_;
  est::ModeHeadPredictor heads_;
};

// Copies the encoder, conditioning and denoiser parameters of `from` into
// `to`; the two models must agree on those shapes.
void transfer_backbone(const AdmModel& from, AdmModel& to);

struct LoadedModel {
  std::unique_ptr<AdmModel> model;
  nlohmann::json meta;
  int stage = 0;
};

// Rebuilds the model from the configuration stored in the checkpoint.
// Throws dc::CheckpointError on unreadable or inconsistent files.
LoadedModel load_model(const std::filesystem::path& path);

// Ground-truth futures of the batch rows in normalized agent frames,
// [N, T_f, 2]. Throws scene::DataError if a row has no future.
dc::Tensor future_targets(std::span<const scene::Scenario> scenarios, const enc::EncoderInputs& inputs,
                          double position_scale);

// Normalized agent-frame trajectories [N, T_f, 2, K] -> global meters,
// indexed [row][mode][step].
std::vector<std::vector<std::vector<scene::Vec2>>> to_global(const dc::Tensor& trajectories,
                                                              const enc::EncoderInputs& inputs,
                                                              double position_scale);

}  // namespace adm::model
