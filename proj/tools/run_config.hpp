// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// TOML run configuration shared by the command-line tool and the acceptance
// gate. Every table is optional; missing keys keep their defaults.

#pragma once

#include <filesystem>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "adm/eval/experiments.hpp"

namespace adm::tools {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  model::ModelConfig model;
  train::TrainConfig stage1;
  train::TrainConfig stage2;
  infer::InferOptions infer;
  eval::BenchOptions bench;
  eval::AblationOptions ablation;
  double validation_fraction = 0.1;  // held out by `train` when no --val is given
  nlohmann::json source = nlohmann::json::object();
};

// Converts a TOML document to the equivalent JSON tree.
nlohmann::json toml_to_json(const std::filesystem::path& path);

// Reads `path` (empty: defaults only). Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j);

}  // namespace adm::tools
