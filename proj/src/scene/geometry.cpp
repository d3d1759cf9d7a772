// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/scene/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace adm::scene {

double AgentFrame::heading_to_local(double h) const {
  return std::remainder(h - heading, 2.0 * std::numbers::pi);
}

AgentFrame agent_frame(const AgentTrack& agent) { return {agent.last_observed(), agent.heading()}; }

namespace {

template <class F>
Scenario map_points(const Scenario& scenario, F&& f) {
  Scenario out = scenario;
  for (auto& a : out.agents) {
    for (auto& p : a.observed) p = f(p);
    if (a.future) {
      for (auto& p : *a.future) p = f(p);
    }
  }
  for (auto& m : out.map) {
    for (auto& p : m.points) p = f(p);
  }
  return out;
}

}  // namespace

LocalView normalize_agent_frame(const Scenario& scenario, const std::string& agent_id) {
  const AgentFrame frame = agent_frame(scenario.agents[scenario.agent_index(agent_id)]);
  return {frame, map_points(scenario, [&](Vec2 p) { return frame.to_local(p); })};
}

Scenario transform_scenario(const Scenario& scenario, double angle, Vec2 shift) {
  return map_points(scenario, [&](Vec2 p) { return rotate(p, angle) + shift; });
}

std::vector<Vec2> resample_polyline(const std::vector<Vec2>& points, double segment_length) {
  if (points.size() < 2) return points;
  std::vector<Vec2> out{points.front()};
  double carried = 0.0;  // arc length since the last emitted point
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Vec2 a = points[i - 1];
    const Vec2 b = points[i];
    const double len = distance(a, b);
    double s = segment_length - carried;
    while (s < len) {
      out.push_back(a + (b - a) * (s / len));
      s += segment_length;
    }
    carried = len - (s - segment_length);
  }
  if (distance(out.back(), points.back()) > 1e-9) {
    out.push_back(points.back());
  }
  return out;
}

std::vector<LaneSegment> lane_segments(const Scenario& scenario, double segment_length) {
  std::vector<LaneSegment> out;
  for (std::size_t p = 0; p < scenario.map.size(); ++p) {
    const auto pts = resample_polyline(scenario.map[p].points, segment_length);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      out.push_back({pts[i], pts[i + 1], p, i});
    }
  }
  return out;
}

Neighborhood neighbor_query(const Scenario& scenario, std::size_t agent, double radius,
                            const std::vector<LaneSegment>& segments) {
  const Vec2 anchor = scenario.agents.at(agent).last_observed();
  Neighborhood out;
  // Ranks use distance on a 1 um grid: exact ties (symmetric road layouts)
  // must stay ties after a rigid motion perturbs the last bits, so that the
  // caps applied by the encoder keep the same set.
  auto rank = [](double d) { return std::llround(d * 1e6); };
  std::vector<std::pair<long long, std::size_t>> agents;
  for (std::size_t j = 0; j < scenario.agents.size(); ++j) {
    if (j == agent) continue;
    const double d = distance(scenario.agents[j].last_observed(), anchor);
    if (d <= radius) agents.emplace_back(rank(d), j);
  }
  std::sort(agents.begin(), agents.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return scenario.agents[a.second].id < scenario.agents[b.second].id;
  });
  for (const auto& [d, j] : agents) out.agents.push_back(j);

  std::vector<std::pair<long long, std::size_t>> lanes;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const double d = distance(segments[s].midpoint(), anchor);
    if (d <= radius) lanes.emplace_back(rank(d), s);
  }
  // Segments are already in map order, so a stable sort breaks ties by it.
  std::stable_sort(lanes.begin(), lanes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [d, s] : lanes) out.lanes.push_back(segments[s]);
  return out;
}

Neighborhood neighbor_query(const Scenario& scenario, const std::string& agent_id, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("neighbor_query: radius must be positive");
  return neighbor_query(scenario, scenario.agent_index(agent_id), radius, lane_segments(scenario));
}

Scenario inject_noise(const Scenario& scenario, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("inject_noise: sigma must be non-negative");
  Scenario out = scenario;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& a : out.agents) {
    for (auto& p : a.observed) {
      p.x += noise(rng);
      p.y += noise(rng);
    }
  }
  return out;
}

}  // namespace adm::scene
