// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Procedural scenarios on straight, curved and four-way intersection road
// templates. Futures are multimodal: agents at an intersection go straight
// or turn, agents on a straight road may change lanes, and every agent draws
// a fresh acceleration for the future window.

#pragma once

#include <cstdint>
#include <vector>

#include "adm/scene/types.hpp"

namespace adm::scene {

enum class RoadTemplate { straight, curved, intersection };
enum class Maneuver { keep_lane, lane_change, straight, left, right };

const char* to_string(RoadTemplate t);
const char* to_string(Maneuver m);

struct SyntheticConfig {
  int min_agents = 3;
  int max_agents = 6;
  // Relative template frequencies.
  double weight_straight = 1.0;
  double weight_curved = 1.0;
  double weight_intersection = 2.0;
  double turn_ratio = 0.5;          // probability an intersection agent turns (left/right equally)
  double lane_change_ratio = 0.35;  // probability a straight-road agent changes lanes
  double min_speed = 4.0;           // m/s at the end of observation
  double max_speed = 14.0;
  double speed_cap = 30.0;          // m/s, hard cap on every step
  double curvature_bound = 0.25;    // 1/m, bound on per-step path curvature
  double observed_accel = 1.0;      // |a| bound over the observed window, m/s^2
  double future_accel_min = -2.5;
  double future_accel_max = 1.5;
  bool random_pose = true;          // apply a random global rigid motion
};

struct LabeledScenario {
  Scenario scenario;
  RoadTemplate road = RoadTemplate::straight;
  std::vector<Maneuver> maneuvers;  // one per agent
};

std::vector<Scenario> generate_synthetic(int count, std::uint64_t seed, const SyntheticConfig& config = {});
std::vector<LabeledScenario> generate_synthetic_labeled(int count, std::uint64_t seed,
                                                        const SyntheticConfig& config = {});

// Largest per-step speed (m/s) and discrete curvature (1/m) over the
// observed+future trajectory; steps shorter than `min_step` meters are
// skipped for curvature.
struct KinematicStats {
  double max_speed = 0.0;
  double max_curvature = 0.0;
};
KinematicStats kinematic_stats(const AgentTrack& agent, double min_step = 0.05);

// splitmix64 finalizer, used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace adm::scene
