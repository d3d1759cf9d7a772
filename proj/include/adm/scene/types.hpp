// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scenario data model: agent tracks sampled at 10 Hz plus vector map
// polylines, all in meters.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adm::scene {

inline constexpr int kObservedSteps = 20;
inline constexpr int kFutureSteps = 30;
inline constexpr double kSampleRateHz = 10.0;
inline constexpr double kStepSeconds = 1.0 / kSampleRateHz;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

using ObservedTrack = std::array<Vec2, kObservedSteps>;
using FutureTrack = std::array<Vec2, kFutureSteps>;

struct AgentTrack {
  std::string id;
  ObservedTrack observed{};
  std::optional<FutureTrack> future;  // absent in test mode
  bool focal = false;

  Vec2 last_observed() const { return observed.back(); }
  // Direction of the last nonzero observed displacement; 0 for an agent
  // that never moved.
  double heading() const;

  friend bool operator==(const AgentTrack&, const AgentTrack&) = default;
};

enum class PolylineKind { centerline, boundary };
enum class TurnDirection { none, left, right };

struct MapPolyline {
  std::string id;
  std::vector<Vec2> points;
  PolylineKind kind = PolylineKind::centerline;
  TurnDirection turn_direction = TurnDirection::none;
  bool is_intersection = false;
  bool traffic_control = false;

  friend bool operator==(const MapPolyline&, const MapPolyline&) = default;
};

struct Scenario {
  std::string scenario_id;
  std::vector<AgentTrack> agents;
  std::vector<MapPolyline> map;

  // Index of the agent with this id; throws std::out_of_range.
  std::size_t agent_index(const std::string& agent_id) const;
  bool has_futures() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Checks every data-model invariant; throws DataError naming the offender.
void validate(const Scenario& scenario);

const char* to_string(PolylineKind kind);
const char* to_string(TurnDirection turn);
PolylineKind parse_polyline_kind(const std::string& text);
TurnDirection parse_turn_direction(const std::string& text);

}  // namespace adm::scene
