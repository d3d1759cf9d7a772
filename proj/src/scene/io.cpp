// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/scene/io.hpp"

#include <fstream>

namespace adm::scene {

using nlohmann::json;

namespace {

json point_json(Vec2 p) { return json::array({p.x, p.y}); }

template <std::size_t N>
json track_json(const std::array<Vec2, N>& track) {
  json out = json::array();
  for (Vec2 p : track) out.push_back(point_json(p));
  return out;
}

Vec2 parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw DataError(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

template <std::size_t N>
std::array<Vec2, N> parse_track(const json& j, const std::string& where, const char* field) {
  if (!j.is_array()) {
    throw DataError(where + ": '" + field + "' must be an array");
  }
  if (j.size() != N) {
    throw DataError(where + ": '" + field + "' has " + std::to_string(j.size()) + " positions, expected " +
                    std::to_string(N));
  }
  std::array<Vec2, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = parse_point(j[i], where);
  }
  return out;
}

const json& required(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw DataError(where + ": missing field '" + key + "'");
  }
  return *it;
}

}  // namespace

json to_json(const Scenario& scenario) {
  json agents = json::array();
  for (const auto& a : scenario.agents) {
    json rec = {{"id", a.id}, {"observed", track_json(a.observed)}};
    rec["future"] = a.future ? track_json(*a.future) : json(nullptr);
    if (a.focal) rec["focal"] = true;
    agents.push_back(std::move(rec));
  }
  json polylines = json::array();
  for (const auto& m : scenario.map) {
    json pts = json::array();
    for (Vec2 p : m.points) pts.push_back(point_json(p));
    polylines.push_back({{"id", m.id},
                         {"points", std::move(pts)},
                         {"kind", to_string(m.kind)},
                         {"turn_direction", to_string(m.turn_direction)},
                         {"is_intersection", m.is_intersection},
                         {"traffic_control", m.traffic_control}});
  }
  return {{"scenario_id", scenario.scenario_id},
          {"agents", std::move(agents)},
          {"map", {{"polylines", std::move(polylines)}}}};
}

Scenario scenario_from_json(const json& record, std::size_t line) {
  const std::string loc = line ? "line " + std::to_string(line) : std::string("record");
  if (!record.is_object()) throw DataError(loc + ": expected a JSON object");
  Scenario s;
  s.scenario_id = required(record, "scenario_id", loc).get<std::string>();
  const std::string where = loc + ", scenario '" + s.scenario_id + "'";

  const auto& agents = required(record, "agents", where);
  if (!agents.is_array()) throw DataError(where + ": 'agents' must be an array");
  for (const auto& a : agents) {
    AgentTrack track;
    track.id = required(a, "id", where).get<std::string>();
    const std::string aw = where + ", agent '" + track.id + "'";
    track.observed = parse_track<kObservedSteps>(required(a, "observed", aw), aw, "observed");
    if (auto f = a.find("future"); f != a.end() && !f->is_null()) {
      track.future = parse_track<kFutureSteps>(*f, aw, "future");
    }
    if (auto f = a.find("focal"); f != a.end()) track.focal = f->get<bool>();
    s.agents.push_back(std::move(track));
  }

  if (auto m = record.find("map"); m != record.end() && !m->is_null()) {
    const auto& polylines = required(*m, "polylines", where);
    for (const auto& p : polylines) {
      MapPolyline poly;
      poly.id = required(p, "id", where).get<std::string>();
      const std::string pw = where + ", polyline '" + poly.id + "'";
      for (const auto& pt : required(p, "points", pw)) poly.points.push_back(parse_point(pt, pw));
      try {
        poly.kind = parse_polyline_kind(required(p, "kind", pw).get<std::string>());
        poly.turn_direction = parse_turn_direction(p.value("turn_direction", std::string("none")));
      } catch (const DataError& e) {
        throw DataError(pw + ": " + e.what());
      }
      poly.is_intersection = p.value("is_intersection", false);
      poly.traffic_control = p.value("traffic_control", false);
      s.map.push_back(std::move(poly));
    }
  }
  try {
    validate(s);
  } catch (const DataError& e) {
    throw DataError(loc + ": " + e.what());
  }
  return s;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario file " + path.string());
  std::vector<Scenario> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + " line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
    try {
      out.push_back(scenario_from_json(record, line));
    } catch (const json::exception& e) {
      throw DataError(path.string() + " line " + std::to_string(line) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + " " + e.what());
    }
  }
  return out;
}

void save_scenarios(const std::filesystem::path& path, std::span<const Scenario> scenarios) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write scenario file " + path.string());
  for (const auto& s : scenarios) out << to_json(s).dump() << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace adm::scene
