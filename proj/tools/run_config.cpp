// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_config.hpp"

#include <sstream>

#include <toml.hpp>

namespace adm::tools {

namespace {

nlohmann::json convert(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, value] : *t) out[std::string(key.str())] = convert(value);
    return out;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : *a) out.push_back(convert(v));
    return out;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  throw ConfigError("unsupported TOML value (dates and times are not used)");
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a table");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

// Keys must exist in the serialized defaults; catches typos that would
// otherwise fall back silently.
void reject_unknown_like(const nlohmann::json& j, const nlohmann::json& reference, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a table");
  for (const auto& [key, value] : j.items()) {
    if (!reference.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    if (reference[key].is_object()) reject_unknown_like(value, reference[key], where.substr(0, where.size() - 1) + "." + key + "]");
  }
}

}  // namespace

nlohmann::json toml_to_json(const std::filesystem::path& path) {
  try {
    return convert(toml::parse_file(path.string()));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << path.string() << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"model", "stage1", "stage2", "infer", "bench", "ablation", "data"}, "configuration");
  RunConfig c;
  c.source = j;
  try {
    if (j.contains("model")) reject_unknown_like(j["model"], model::to_json(c.model), "[model]");
    for (const char* stage : {"stage1", "stage2"}) {
      if (j.contains(stage)) reject_unknown_like(j[stage], train::to_json(c.stage1), "[" + std::string(stage) + "]");
    }
    if (j.contains("infer")) reject_unknown_like(j["infer"], infer::to_json(c.infer), "[infer]");
    if (j.contains("model")) c.model = model::model_config_from_json(j["model"]);
    if (j.contains("stage1")) c.stage1 = train::train_config_from_json(j["stage1"]);
    if (j.contains("stage2")) c.stage2 = train::train_config_from_json(j["stage2"]);
    if (j.contains("infer")) c.infer = infer::infer_options_from_json(j["infer"]);
    if (j.contains("bench")) {
      const auto& b = j["bench"];
      reject_unknown(b,
                     {"specs", "metric_scenarios", "full_chain_metric_scenarios", "timing_scenarios", "repetitions"},
                     "[bench]");
      for (const auto& s : b.value("specs", nlohmann::json::array())) {
        c.bench.specs.push_back(eval::parse_sampling_spec(s.get<std::string>()));
      }
      c.bench.metric_scenarios = b.value("metric_scenarios", c.bench.metric_scenarios);
      c.bench.full_chain_metric_scenarios = b.value("full_chain_metric_scenarios", c.bench.full_chain_metric_scenarios);
      c.bench.timing_scenarios = b.value("timing_scenarios", c.bench.timing_scenarios);
      c.bench.repetitions = b.value("repetitions", c.bench.repetitions);
    }
    c.ablation.stage2 = c.stage2;
    if (j.contains("ablation")) {
      const auto& a = j["ablation"];
      reject_unknown(a, {"fraction", "variants", "baseline_steps", "stage2_epochs"}, "[ablation]");
      c.ablation.fraction = a.value("fraction", c.ablation.fraction);
      for (const auto& v : a.value("variants", nlohmann::json::array())) {
        c.ablation.variants.push_back(eval::parse_ablation_variant(v.get<std::string>()));
      }
      c.ablation.baseline_steps = a.value("baseline_steps", c.ablation.baseline_steps);
      c.ablation.stage2.epochs = a.value("stage2_epochs", c.ablation.stage2.epochs);
    }
    if (j.contains("data")) {
      reject_unknown(j["data"], {"validation_fraction"}, "[data]");
      c.validation_fraction = j["data"].value("validation_fraction", c.validation_fraction);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
  if (c.bench.specs.empty()) c.bench.specs = eval::default_sampling_specs(c.model.diffusion_steps);
  if (c.ablation.variants.empty()) c.ablation.variants = eval::default_ablation_variants();
  c.ablation.gamma = c.infer.steps;
  c.ablation.estimator_sampler = c.infer.sampler;
  c.bench.estimator_sampler = c.infer.sampler;
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (path.empty()) return run_config_from_json(nlohmann::json::object());
  if (!std::filesystem::exists(path)) throw ConfigError("configuration file not found: " + path.string());
  return run_config_from_json(toml_to_json(path));
}

}  // namespace adm::tools
