// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSONL scenario files, one scenario per line:
//   {"scenario_id", "agents": [{"id", "observed": [[x,y]x20],
//    "future": [[x,y]x30] | null, "focal"?: bool}],
//    "map": {"polylines": [{"id", "points", "kind", "turn_direction",
//            "is_intersection", "traffic_control"}]}}

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adm/scene/types.hpp"

namespace adm::scene {

nlohmann::json to_json(const Scenario& scenario);
// `line` is only used in error messages (1-based; 0 means unknown).
Scenario scenario_from_json(const nlohmann::json& record, std::size_t line = 0);

std::vector<Scenario> load_scenarios(const std::filesystem::path& path);
void save_scenarios(const std::filesystem::path& path, std::span<const Scenario> scenarios);

}  // namespace adm::scene
