// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Inference. The accelerated path encodes the scene, draws K starting
// trajectories from the prior network and runs gamma reverse steps; the
// baselines run a full or strided reverse chain from Gaussian noise.

#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adm/model/model.hpp"

namespace adm::infer {

enum class Method { kEstimator, kDdpm, kDdim };
Method parse_method(std::string_view name);
std::string to_string(Method m);

// How the gamma short-chain steps are labelled for the denoiser.
enum class StepLabels {
  kLiteral,  // gamma, gamma-1, ..., 1 on the full schedule
  kTail,     // the last gamma entries of a strided DDIM visit order
};
StepLabels parse_step_labels(std::string_view name);
std::string to_string(StepLabels s);

struct InferOptions {
  Method method = Method::kEstimator;
  int steps = 5;  // gamma for the estimator path, chain length for baselines
  diff::Sampler sampler = diff::Sampler::ddpm;  // estimator path only
  StepLabels labels = StepLabels::kLiteral;
  int tail_reference_steps = 50;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const InferOptions& o);
InferOptions infer_options_from_json(const nlohmann::json& j);

struct AgentPrediction {
  std::string scenario_id;
  std::string agent_id;
  bool focal = false;
  std::vector<double> probabilities;                    // [K]
  std::vector<std::vector<scene::Vec2>> trajectories;  // [K][T_f], global frame
};

struct PredictionMeta {
  std::string method;
  int gamma = 0;  // denoiser steps run
  std::string sampler;
  std::uint64_t seed = 0;  // per-scenario seed actually used
  double elapsed_ms = 0.0;
};

struct PredictionSet {
  std::string scenario_id;
  PredictionMeta meta;
  std::vector<AgentPrediction> agents;
};

// Seed of one scenario's random stream, derived from the run seed and id.
std::uint64_t scenario_seed(std::uint64_t run_seed, const std::string& scenario_id);

// Algorithm-level entry points for a single scenario. Throws
// std::invalid_argument for steps < 1 or steps > T, or when the model has no
// prior network and the estimator path is requested.
PredictionSet infer(const model::AdmModel& model, const scene::Scenario& scenario, const InferOptions& options);

std::vector<PredictionSet> infer_all(const model::AdmModel& model, std::span<const scene::Scenario> scenarios,
                                     const InferOptions& options);

using NoisePredictor = std::function<dc::Tensor(const dc::Tensor& a_tau, int tau)>;

// Descending denoiser step labels of the chain described by `options`.
std::vector<int> visit_order(int total_steps, const InferOptions& options);

// Applies one reverse step per entry of `visits`, jumping to the next entry
// (0 after the last). DDPM cannot skip steps.
dc::Tensor reverse_chain(dc::Tensor start, std::span<const int> visits, diff::Sampler sampler,
                         const NoisePredictor& predict, const diff::NoiseSchedule& schedule, std::mt19937_64& rng);

// Normalized agent-frame trajectories [N, T_f, 2, K] before de-normalization,
// for callers that need the raw chain output.
dc::Tensor run_chain(const model::AdmModel& model, const model::EncodedBatch& encoded, const InferOptions& options,
                     std::mt19937_64& rng);

// One JSON object per agent.
void write_predictions(const std::filesystem::path& path, std::span<const PredictionSet> sets);
std::vector<PredictionSet> read_predictions(const std::filesystem::path& path);

}  // namespace adm::infer
