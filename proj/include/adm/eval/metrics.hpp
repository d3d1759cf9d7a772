// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Displacement metrics over K predicted modes.

#pragma once

#include <span>
#include <vector>

#include "adm/infer/infer.hpp"

namespace adm::eval {

inline constexpr double kMissThreshold = 2.0;  // meters

struct AgentMetrics {
  double ade = 0.0;    // min over modes of the mean displacement
  double fde = 0.0;    // min over modes of the final displacement
  bool miss = false;   // fde > threshold
  double brier = 0.0;  // fde + (1 - P)^2, P of the min-FDE mode
};

// Throws scene::DataError on length or mode-count mismatches.
AgentMetrics agent_metrics(const infer::AgentPrediction& prediction, std::span<const scene::Vec2> ground_truth,
                           double miss_threshold = kMissThreshold);

struct MetricReport {
  double min_ade = 0.0;
  double min_fde = 0.0;
  double miss_rate = 0.0;
  double brier_min_fde = 0.0;
  std::int64_t agents = 0;
  std::int64_t scenarios = 0;
};

struct EvalOptions {
  bool focal_only = false;
  double miss_threshold = kMissThreshold;
};

// Averages over every agent with a ground-truth future (or only focal ones).
// Predictions are matched by scenario and agent id; a scored agent without a
// prediction is a DataError.
MetricReport compute_metrics(std::span<const infer::PredictionSet> predictions,
                             std::span<const scene::Scenario> ground_truth, const EvalOptions& options = {});

}  // namespace adm::eval
