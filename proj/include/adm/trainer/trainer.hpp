// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-phase training. Stage 1 fits the encoder and denoiser on noised
// ground-truth futures; Stage 2 freezes them and fits the prior network and
// the mode heads.

#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adm/model/model.hpp"

namespace adm::train {

struct TrainConfig {
  int epochs = 64;
  double lr = 5e-4;
  double weight_decay = 1e-4;
  int batch_size = 32;        // scenarios per step
  double grad_clip = 5.0;
  std::uint64_t seed = 0;
  // Stage 1
  int noise_draws = 1;        // (tau, eps) draws per agent per step
  double nll_weight = 0.1;    // weight of the reconstruction NLL term
  bool nll_snr_weighting = true;  // scale each row's NLL by alpha_bar(tau)
  // Stage 2
  double ce_weight = 1.0;
  double temperature = 1.0;
  bool through_denoiser = false;  // fit the prior through gamma denoiser steps
  int gamma = 5;
  // Validation: scenarios and fixed noise draws used for the held-out score.
  int validation_draws = 4;
  std::filesystem::path csv_log;  // empty: no log file
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EpochLog {
  int stage = 0;
  int epoch = 0;
  double loss = 0.0;
  double eps_mse = 0.0;     // stage 1
  double nll = 0.0;
  double ce = 0.0;          // stage 2
  double grad_norm = 0.0;   // mean pre-clip norm
  double validation = 0.0;  // stage 1: held-out eps-MSE; stage 2: held-out minADE of the prior (m)
};

using EpochCallback = std::function<void(const EpochLog&)>;

std::vector<EpochLog> train_stage1(model::AdmModel& model, std::span<const scene::Scenario> train,
                                   std::span<const scene::Scenario> validation, const TrainConfig& config,
                                   const EpochCallback& on_epoch = {});

// Requires a model whose encoder and denoiser were fitted in Stage 1. The
// frozen parameters are left bit-identical.
std::vector<EpochLog> train_stage2(model::AdmModel& model, std::span<const scene::Scenario> train,
                                   std::span<const scene::Scenario> validation, const TrainConfig& config,
                                   const EpochCallback& on_epoch = {});

// Held-out eps-MSE with draws fixed by `seed`.
double validation_eps_mse(const model::AdmModel& model, std::span<const scene::Scenario> scenarios, int draws,
                          std::uint64_t seed);

void write_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log);
std::vector<EpochLog> read_log_csv(const std::filesystem::path& path);

}  // namespace adm::train
