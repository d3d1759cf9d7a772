// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "adm/encoder/encoder.hpp"

namespace adm::enc {

using scene::kObservedSteps;
using scene::Vec2;

namespace {

// Positions are divided by these before entering the network.
constexpr double kLocalPositionScale = 10.0;
constexpr double kEdgePositionScale = 20.0;

}  // namespace

nlohmann::json to_json(const EncoderConfig& c) {
  return {{"dim", c.dim},
          {"heads", c.heads},
          {"gru_layers", c.gru_layers},
          {"global_layers", c.global_layers},
          {"token_hidden", c.token_hidden},
          {"ffn_hidden", c.ffn_hidden},
          {"radius", c.radius},
          {"max_neighbors", c.max_neighbors},
          {"max_lanes", c.max_lanes},
          {"lane_segment_length", c.lane_segment_length}};
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.dim = j.value("dim", c.dim);
  c.heads = j.value("heads", c.heads);
  c.gru_layers = j.value("gru_layers", c.gru_layers);
  c.global_layers = j.value("global_layers", c.global_layers);
  c.token_hidden = j.value("token_hidden", c.token_hidden);
  c.ffn_hidden = j.value("ffn_hidden", c.ffn_hidden);
  c.radius = j.value("radius", c.radius);
  c.max_neighbors = j.value("max_neighbors", c.max_neighbors);
  c.max_lanes = j.value("max_lanes", c.max_lanes);
  c.lane_segment_length = j.value("lane_segment_length", c.lane_segment_length);
  return c;
}

EncoderInputs build_encoder_inputs(std::span<const scene::Scenario> scenarios, const EncoderConfig& config) {
  constexpr std::int64_t kT = kObservedSteps;
  EncoderInputs in;
  std::vector<scene::Neighborhood> hoods;
  std::vector<std::int64_t> group_base;
  std::int64_t max_m = 1;
  std::int64_t max_l = 1;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& sc = scenarios[s];
    const auto segments = scene::lane_segments(sc, config.lane_segment_length);
    group_base.push_back(static_cast<std::int64_t>(in.refs.size()));
    in.group_size = std::max<std::int64_t>(in.group_size, static_cast<std::int64_t>(sc.agents.size()));
    for (std::size_t a = 0; a < sc.agents.size(); ++a) {
      auto hood = scene::neighbor_query(sc, a, config.radius, segments);
      if (hood.agents.size() > static_cast<std::size_t>(config.max_neighbors)) hood.agents.resize(config.max_neighbors);
      if (hood.lanes.size() > static_cast<std::size_t>(config.max_lanes)) hood.lanes.resize(config.max_lanes);
      max_m = std::max<std::int64_t>(max_m, static_cast<std::int64_t>(hood.agents.size()));
      max_l = std::max<std::int64_t>(max_l, static_cast<std::int64_t>(hood.lanes.size()));
      in.refs.push_back({s, a});
      in.frames.push_back(scene::agent_frame(sc.agents[a]));
      hoods.push_back(std::move(hood));
    }
  }
  const std::int64_t n = static_cast<std::int64_t>(in.refs.size());
  const std::int64_t m_slots = max_m;
  const std::int64_t l_slots = max_l;
  const std::int64_t keys = m_slots * kT + l_slots;
  const std::int64_t group = in.group_size;
  in.agents = n;
  in.neighbor_slots = m_slots;
  in.lane_slots = l_slots;

  std::vector<double> motion(static_cast<std::size_t>(n * kT * kMotionFeatures), 0.0);
  std::vector<double> neighbor(static_cast<std::size_t>(n * m_slots * kT * kNeighborFeatures), 0.0);
  std::vector<double> lanes(static_cast<std::size_t>(n * l_slots * kLaneFeatures), 0.0);
  std::vector<double> edges(static_cast<std::size_t>(n * group * kEdgeFeatures), 0.0);
  auto local_mask = std::make_shared<dc::AttentionMask>();
  local_mask->shape = {n, kT, keys};
  local_mask->allowed.assign(static_cast<std::size_t>(n * kT * keys), 0);
  auto global_mask = std::make_shared<dc::AttentionMask>();
  global_mask->shape = {n, 1, group};
  global_mask->allowed.assign(static_cast<std::size_t>(n * group), 0);
  in.group_index.assign(static_cast<std::size_t>(n * group), 0);

  for (std::int64_t i = 0; i < n; ++i) {
    const auto [s, a] = in.refs[static_cast<std::size_t>(i)];
    const auto& sc = scenarios[s];
    const auto& agent = sc.agents[a];
    const auto& frame = in.frames[static_cast<std::size_t>(i)];
    const auto& hood = hoods[static_cast<std::size_t>(i)];

    for (std::int64_t t = 1; t < kT; ++t) {
      const Vec2 d = frame.direction_to_local(agent.observed[t] - agent.observed[t - 1]);
      double* dst = &motion[static_cast<std::size_t>((i * kT + t) * kMotionFeatures)];
      dst[0] = d.x;
      dst[1] = d.y;
    }

    for (std::size_t m = 0; m < hood.agents.size(); ++m) {
      const auto& other = sc.agents[hood.agents[m]];
      for (std::int64_t t = 0; t < kT; ++t) {
        const Vec2 rel = frame.direction_to_local(other.observed[t] - agent.observed[t]) * (1.0 / kLocalPositionScale);
        const Vec2 vel = t == 0 ? Vec2{} : frame.direction_to_local(other.observed[t] - other.observed[t - 1]);
        const std::int64_t row = static_cast<std::int64_t>(m) * kT + t;
        double* dst = &neighbor[static_cast<std::size_t>((i * m_slots * kT + row) * kNeighborFeatures)];
        dst[0] = rel.x;
        dst[1] = rel.y;
        dst[2] = vel.x;
        dst[3] = vel.y;
        local_mask->allowed[static_cast<std::size_t>((i * kT + t) * keys + row)] = 1;
      }
    }

    for (std::size_t l = 0; l < hood.lanes.size(); ++l) {
      const auto& seg = hood.lanes[l];
      const auto& poly = sc.map[seg.polyline];
      const Vec2 mid = frame.to_local(seg.midpoint()) * (1.0 / kLocalPositionScale);
      const Vec2 dir = frame.direction_to_local(seg.end - seg.start);
      const double len = dir.norm();
      double* dst = &lanes[static_cast<std::size_t>((i * l_slots + static_cast<std::int64_t>(l)) * kLaneFeatures)];
      dst[0] = mid.x;
      dst[1] = mid.y;
      dst[2] = dir.x / len;
      dst[3] = dir.y / len;
      dst[4] = 0.5 * len;
      dst[5] = poly.kind == scene::PolylineKind::centerline ? 1.0 : 0.0;
      dst[6] = poly.turn_direction == scene::TurnDirection::left ? 1.0 : 0.0;
      dst[7] = poly.turn_direction == scene::TurnDirection::right ? 1.0 : 0.0;
      dst[8] = poly.is_intersection ? 1.0 : 0.0;
      dst[9] = poly.traffic_control ? 1.0 : 0.0;
      for (std::int64_t t = 0; t < kT; ++t) {
        local_mask->allowed[static_cast<std::size_t>((i * kT + t) * keys + m_slots * kT + static_cast<std::int64_t>(l))] = 1;
      }
    }

    const std::int64_t base = group_base[s];
    const double heading = agent.heading();
    for (std::int64_t g = 0; g < group; ++g) {
      const auto slot = static_cast<std::size_t>(i * group + g);
      if (g >= static_cast<std::int64_t>(sc.agents.size())) {
        in.group_index[slot] = i;
        continue;
      }
      const auto& other = sc.agents[static_cast<std::size_t>(g)];
      in.group_index[slot] = base + g;
      global_mask->allowed[slot] = 1;
      const Vec2 rel = frame.to_local(other.last_observed()) * (1.0 / kEdgePositionScale);
      const double dh = other.heading() - heading;
      double* dst = &edges[slot * kEdgeFeatures];
      dst[0] = rel.x;
      dst[1] = rel.y;
      dst[2] = std::cos(dh);
      dst[3] = std::sin(dh);
    }
  }

  in.motion = dc::Tensor::from_vector({n, kT, kMotionFeatures}, std::move(motion));
  in.neighbor = dc::Tensor::from_vector({n, m_slots * kT, kNeighborFeatures}, std::move(neighbor));
  in.lanes = dc::Tensor::from_vector({n, l_slots, kLaneFeatures}, std::move(lanes));
  in.edges = dc::Tensor::from_vector({n, group, kEdgeFeatures}, std::move(edges));
  in.local_mask = std::move(local_mask);
  in.global_mask = std::move(global_mask);
  return in;
}

}  // namespace adm::enc
