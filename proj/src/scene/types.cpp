// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/scene/types.hpp"

#include <set>

namespace adm::scene {

double AgentTrack::heading() const {
  for (int t = kObservedSteps - 1; t > 0; --t) {
    const Vec2 d = observed[t] - observed[t - 1];
    if (d.x != 0.0 || d.y != 0.0) {
      return std::atan2(d.y, d.x);
    }
  }
  return 0.0;
}

std::size_t Scenario::agent_index(const std::string& agent_id) const {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].id == agent_id) return i;
  }
  throw std::out_of_range("scenario '" + scenario_id + "' has no agent '" + agent_id + "'");
}

bool Scenario::has_futures() const {
  for (const auto& a : agents) {
    if (!a.future) return false;
  }
  return true;
}

namespace {

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

void validate(const Scenario& scenario) {
  const std::string where = "scenario '" + scenario.scenario_id + "'";
  if (scenario.agents.empty()) {
    throw DataError(where + ": no agents");
  }
  std::set<std::string> ids;
  for (const auto& a : scenario.agents) {
    if (!ids.insert(a.id).second) {
      throw DataError(where + ": duplicate agent id '" + a.id + "'");
    }
    for (Vec2 p : a.observed) {
      if (!finite(p)) throw DataError(where + ": agent '" + a.id + "' has a non-finite observed position");
    }
    if (a.future) {
      for (Vec2 p : *a.future) {
        if (!finite(p)) throw DataError(where + ": agent '" + a.id + "' has a non-finite future position");
      }
    }
  }
  std::set<std::string> poly_ids;
  for (const auto& m : scenario.map) {
    if (!poly_ids.insert(m.id).second) {
      throw DataError(where + ": duplicate polyline id '" + m.id + "'");
    }
    if (m.points.size() < 2) {
      throw DataError(where + ": polyline '" + m.id + "' has fewer than 2 points");
    }
    for (std::size_t i = 0; i < m.points.size(); ++i) {
      if (!finite(m.points[i])) throw DataError(where + ": polyline '" + m.id + "' has a non-finite point");
      if (i > 0 && m.points[i] == m.points[i - 1]) {
        throw DataError(where + ": polyline '" + m.id + "' repeats point " + std::to_string(i));
      }
    }
  }
}

const char* to_string(PolylineKind kind) { return kind == PolylineKind::centerline ? "centerline" : "boundary"; }

const char* to_string(TurnDirection turn) {
  switch (turn) {
    case TurnDirection::left: return "left";
    case TurnDirection::right: return "right";
    default: return "none";
  }
}

PolylineKind parse_polyline_kind(const std::string& text) {
  if (text == "centerline") return PolylineKind::centerline;
  if (text == "boundary") return PolylineKind::boundary;
  throw DataError("unknown polyline kind '" + text + "'");
}

TurnDirection parse_turn_direction(const std::string& text) {
  if (text == "none") return TurnDirection::none;
  if (text == "left") return TurnDirection::left;
  if (text == "right") return TurnDirection::right;
  throw DataError("unknown turn direction '" + text + "'");
}

}  // namespace adm::scene
