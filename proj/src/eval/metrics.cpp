// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/eval/metrics.hpp"

#include <limits>
#include <map>

namespace adm::eval {

AgentMetrics agent_metrics(const infer::AgentPrediction& p, std::span<const scene::Vec2> gt, double miss_threshold) {
  if (p.trajectories.empty() || p.trajectories.size() != p.probabilities.size()) {
    throw scene::DataError("agent " + p.agent_id + ": " + std::to_string(p.trajectories.size()) + " modes but " +
                           std::to_string(p.probabilities.size()) + " probabilities");
  }
  AgentMetrics m;
  m.ade = std::numeric_limits<double>::infinity();
  m.fde = std::numeric_limits<double>::infinity();
  std::size_t fde_mode = 0;
  for (std::size_t k = 0; k < p.trajectories.size(); ++k) {
    const auto& traj = p.trajectories[k];
    if (traj.size() != gt.size() || gt.empty()) {
      throw scene::DataError("agent " + p.agent_id + ": trajectory length " + std::to_string(traj.size()) +
                             " vs ground truth " + std::to_string(gt.size()));
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < gt.size(); ++t) sum += scene::distance(traj[t], gt[t]);
    m.ade = std::min(m.ade, sum / static_cast<double>(gt.size()));
    const double final_error = scene::distance(traj.back(), gt.back());
    if (final_error < m.fde) {
      m.fde = final_error;
      fde_mode = k;
    }
  }
  m.miss = m.fde > miss_threshold;
  const double confidence = 1.0 - p.probabilities[fde_mode];
  m.brier = m.fde + confidence * confidence;
  return m;
}

MetricReport compute_metrics(std::span<const infer::PredictionSet> predictions,
                             std::span<const scene::Scenario> ground_truth, const EvalOptions& options) {
  std::map<std::pair<std::string, std::string>, const infer::AgentPrediction*> lookup;
  for (const auto& set : predictions) {
    for (const auto& a : set.agents) lookup[{a.scenario_id, a.agent_id}] = &a;
  }
  MetricReport r;
  double ade = 0.0, fde = 0.0, miss = 0.0, brier = 0.0;
  for (const auto& s : ground_truth) {
    bool scored = false;
    for (const auto& agent : s.agents) {
      if (!agent.future || (options.focal_only && !agent.focal)) continue;
      const auto it = lookup.find({s.scenario_id, agent.id});
      if (it == lookup.end()) {
        throw scene::DataError("no prediction for scenario " + s.scenario_id + ", agent " + agent.id);
      }
      const auto m = agent_metrics(*it->second, *agent.future, options.miss_threshold);
      ade += m.ade;
      fde += m.fde;
      miss += m.miss ? 1.0 : 0.0;
      brier += m.brier;
      ++r.agents;
      scored = true;
    }
    if (scored) ++r.scenarios;
  }
  if (r.agents > 0) {
    const double n = static_cast<double>(r.agents);
    r.min_ade = ade / n;
    r.min_fde = fde / n;
    r.miss_rate = miss / n;
    r.brier_min_fde = brier / n;
  }
  return r;
}

}  // namespace adm::eval
