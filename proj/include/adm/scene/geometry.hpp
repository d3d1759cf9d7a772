// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Agent-centric frames, neighborhood queries and observation noise.

#pragma once

#include <cstdint>
#include <vector>

#include "adm/scene/types.hpp"

namespace adm::scene {

// Rigid frame anchored at an agent's last observed position with +x along
// its heading.
struct AgentFrame {
  Vec2 origin;
  double heading = 0.0;

  Vec2 to_local(Vec2 global) const { return rotate(global - origin, -heading); }
  Vec2 to_global(Vec2 local) const { return rotate(local, heading) + origin; }
  Vec2 direction_to_local(Vec2 d) const { return rotate(d, -heading); }
  double heading_to_local(double h) const;
};

AgentFrame agent_frame(const AgentTrack& agent);

struct LocalView {
  AgentFrame frame;
  Scenario scenario;  // every coordinate expressed in `frame`
};

LocalView normalize_agent_frame(const Scenario& scenario, const std::string& agent_id);

// Applies p -> rotate(p, angle) + shift to every coordinate.
Scenario transform_scenario(const Scenario& scenario, double angle, Vec2 shift);

struct LaneSegment {
  Vec2 start;
  Vec2 end;
  std::size_t polyline = 0;  // index into Scenario::map
  std::size_t index = 0;     // position along the resampled polyline

  Vec2 midpoint() const { return (start + end) * 0.5; }
};

// Resamples the polyline by arc length so every segment is `segment_length`
// long except possibly the last one.
std::vector<Vec2> resample_polyline(const std::vector<Vec2>& points, double segment_length);
std::vector<LaneSegment> lane_segments(const Scenario& scenario, double segment_length = 2.0);

struct Neighborhood {
  std::vector<std::size_t> agents;       // indices into Scenario::agents, anchor excluded
  std::vector<LaneSegment> lanes;
};

// Agents whose last observed position and lane segments whose midpoint lie
// within `radius` of the anchor's last observed position. Results are sorted
// by distance, ties broken by agent id / polyline order.
Neighborhood neighbor_query(const Scenario& scenario, const std::string& agent_id, double radius);
Neighborhood neighbor_query(const Scenario& scenario, std::size_t agent, double radius,
                            const std::vector<LaneSegment>& segments);

// Adds i.i.d. N(0, sigma^2) noise to every observed coordinate.
Scenario inject_noise(const Scenario& scenario, double sigma, std::uint64_t seed);

}  // namespace adm::scene
