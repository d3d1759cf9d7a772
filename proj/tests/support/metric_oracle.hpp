// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exhaustive per-mode reference for the displacement metrics and a random
// instance generator, shared by the unit suite and the acceptance gate.

#pragma once

#include <array>
#include <cmath>
#include <random>

#include "adm/eval/metrics.hpp"

namespace adm::testing {

struct MetricInstance {
  infer::AgentPrediction prediction;
  std::vector<scene::Vec2> ground_truth;
};

inline MetricInstance random_metric_instance(std::mt19937_64& rng, int modes = 6) {
  std::normal_distribution<double> step(0.0, 1.0);
  std::uniform_real_distribution<double> spread(0.1, 4.0);
  std::uniform_real_distribution<double> logit(-2.0, 2.0);
  MetricInstance inst;
  scene::Vec2 p{0, 0};
  for (int t = 0; t < scene::kFutureSteps; ++t) {
    p = p + scene::Vec2{1.0 + 0.2 * step(rng), 0.2 * step(rng)};
    inst.ground_truth.push_back(p);
  }
  std::vector<double> w(static_cast<std::size_t>(modes));
  double z = 0.0;
  for (auto& v : w) z += (v = std::exp(logit(rng)));
  for (int k = 0; k < modes; ++k) {
    const double s = spread(rng);
    std::vector<scene::Vec2> traj;
    for (const auto& g : inst.ground_truth) traj.push_back(g + scene::Vec2{s * step(rng), s * step(rng)});
    inst.prediction.trajectories.push_back(std::move(traj));
    inst.prediction.probabilities.push_back(w[static_cast<std::size_t>(k)] / z);
  }
  inst.prediction.agent_id = "a0";
  return inst;
}

// Direct double loop over modes and steps, written without the library.
inline eval::AgentMetrics oracle_metrics(const MetricInstance& inst, double threshold = 2.0) {
  const auto& modes = inst.prediction.trajectories;
  const auto& gt = inst.ground_truth;
  double best_ade = 1e300, best_fde = 1e300;
  std::size_t best_fde_mode = 0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    double total = 0.0;
    for (std::size_t t = 0; t < gt.size(); ++t) {
      const double dx = modes[k][t].x - gt[t].x;
      const double dy = modes[k][t].y - gt[t].y;
      total += std::sqrt(dx * dx + dy * dy);
    }
    best_ade = std::min(best_ade, total / static_cast<double>(gt.size()));
    const double dx = modes[k].back().x - gt.back().x;
    const double dy = modes[k].back().y - gt.back().y;
    const double fde = std::sqrt(dx * dx + dy * dy);
    if (fde < best_fde) {
      best_fde = fde;
      best_fde_mode = k;
    }
  }
  const double p = inst.prediction.probabilities[best_fde_mode];
  return {best_ade, best_fde, best_fde > threshold, best_fde + (1.0 - p) * (1.0 - p)};
}

// A single mode offset from a straight ground truth by a constant vector.
inline MetricInstance offset_instance(scene::Vec2 offset, double probability) {
  MetricInstance inst;
  std::vector<scene::Vec2> traj;
  for (int t = 0; t < scene::kFutureSteps; ++t) {
    inst.ground_truth.push_back({1.5 * t, 0.0});
    traj.push_back(inst.ground_truth.back() + offset);
  }
  inst.prediction.trajectories.push_back(traj);
  inst.prediction.probabilities.push_back(probability);
  return inst;
}

}  // namespace adm::testing
