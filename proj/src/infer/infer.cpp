// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/infer/infer.hpp"

#include <chrono>
#include <fstream>
#include <map>

#include "adm/scene/synthetic.hpp"

namespace adm::infer {

using dc::Tensor;

Method parse_method(std::string_view name) {
  if (name == "estimator") return Method::kEstimator;
  if (name == "ddpm") return Method::kDdpm;
  if (name == "ddim") return Method::kDdim;
  throw std::invalid_argument("unknown sampling method '" + std::string(name) + "' (estimator|ddpm|ddim)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kEstimator: return "estimator";
    case Method::kDdpm: return "ddpm";
    case Method::kDdim: return "ddim";
  }
  return "?";
}

StepLabels parse_step_labels(std::string_view name) {
  if (name == "literal") return StepLabels::kLiteral;
  if (name == "tail") return StepLabels::kTail;
  throw std::invalid_argument("unknown step labelling '" + std::string(name) + "' (literal|tail)");
}

std::string to_string(StepLabels s) { return s == StepLabels::kLiteral ? "literal" : "tail"; }

nlohmann::json to_json(const InferOptions& o) {
  return {{"method", to_string(o.method)},
          {"steps", o.steps},
          {"sampler", diff::to_string(o.sampler)},
          {"labels", to_string(o.labels)},
          {"tail_reference_steps", o.tail_reference_steps},
          {"seed", o.seed}};
}

InferOptions infer_options_from_json(const nlohmann::json& j) {
  InferOptions o;
  o.method = parse_method(j.value("method", to_string(o.method)));
  o.steps = j.value("steps", o.steps);
  o.sampler = diff::parse_sampler(j.value("sampler", std::string(diff::to_string(o.sampler))));
  o.labels = parse_step_labels(j.value("labels", to_string(o.labels)));
  o.tail_reference_steps = j.value("tail_reference_steps", o.tail_reference_steps);
  o.seed = j.value("seed", o.seed);
  return o;
}

std::uint64_t scenario_seed(std::uint64_t run_seed, const std::string& scenario_id) {
  // FNV-1a: stable across platforms, unlike std::hash.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : scenario_id) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return scene::mix_seed(run_seed, h);
}

namespace {

void check_steps(const model::AdmModel& model, const InferOptions& o) {
  const int total = model.schedule().steps;
  if (o.steps < 1 || o.steps > total) {
    throw std::invalid_argument("steps must lie in [1, " + std::to_string(total) + "], got " + std::to_string(o.steps));
  }
  if (o.method == Method::kDdpm && o.steps != total) {
    throw std::invalid_argument("ddpm runs the full chain: steps must equal T = " + std::to_string(total));
  }
  if (o.method == Method::kEstimator && model.config().prior == model::PriorKind::kNone) {
    throw std::invalid_argument("the estimator path needs a prior network; this checkpoint has none");
  }
  if (o.labels == StepLabels::kTail && (o.tail_reference_steps < o.steps || o.tail_reference_steps > total)) {
    throw std::invalid_argument("tail labelling needs steps <= tail_reference_steps <= T");
  }
}

}  // namespace

std::vector<int> visit_order(int total_steps, const InferOptions& o) {
  switch (o.method) {
    case Method::kDdpm: return diff::ddim_timesteps(total_steps, total_steps);
    case Method::kDdim: return diff::ddim_timesteps(total_steps, o.steps);
    case Method::kEstimator: {
      if (o.labels == StepLabels::kLiteral) return diff::ddim_timesteps(o.steps, o.steps);
      const auto reference = diff::ddim_timesteps(total_steps, o.tail_reference_steps);
      return {reference.end() - o.steps, reference.end()};
    }
  }
  return {};
}

Tensor reverse_chain(Tensor start, std::span<const int> visits, diff::Sampler sampler, const NoisePredictor& predict,
                     const diff::NoiseSchedule& schedule, std::mt19937_64& rng) {
  Tensor a = std::move(start);
  for (std::size_t i = 0; i < visits.size(); ++i) {
    const int tau = visits[i];
    const int next = i + 1 < visits.size() ? visits[i + 1] : 0;
    if (sampler == diff::Sampler::ddpm && next != tau - 1) {
      throw std::invalid_argument("ddpm sampling cannot skip steps; use the ddim sampler with tail labels");
    }
    a = diff::sample_step(a, tau, predict(a, tau), schedule, sampler, rng, next);
  }
  return a;
}

Tensor run_chain(const model::AdmModel& model, const model::EncodedBatch& encoded, const InferOptions& options,
                 std::mt19937_64& rng) {
  check_steps(model, options);
  dc::NoGradGuard no_grad;
  const std::int64_t modes = model.config().modes();
  Tensor a = options.method == Method::kEstimator
                 ? model.prior(encoded.embeddings)
                 : diff::standard_normal({encoded.inputs.agents, scene::kFutureSteps, 2, modes}, rng);
  const auto visits = visit_order(model.schedule().steps, options);
  const diff::Sampler sampler = options.method == Method::kEstimator ? options.sampler
                                : options.method == Method::kDdpm    ? diff::Sampler::ddpm
                                                                     : diff::Sampler::ddim;
  return reverse_chain(
      std::move(a), visits, sampler,
      [&](const Tensor& x, int tau) { return model.denoiser()(x, tau, encoded.condition); }, model.schedule(), rng);
}

PredictionSet infer(const model::AdmModel& model, const scene::Scenario& scenario, const InferOptions& options) {
  check_steps(model, options);
  const auto start = std::chrono::steady_clock::now();
  PredictionSet out;
  out.scenario_id = scenario.scenario_id;
  out.meta.method = to_string(options.method);
  out.meta.gamma = options.steps;
  out.meta.sampler = options.method == Method::kEstimator ? diff::to_string(options.sampler) : to_string(options.method);
  out.meta.seed = scenario_seed(options.seed, scenario.scenario_id);
  std::mt19937_64 rng(out.meta.seed);

  dc::NoGradGuard no_grad;
  const std::span<const scene::Scenario> one(&scenario, 1);
  const auto encoded = model.encode(one);
  const Tensor traj = run_chain(model, encoded, options, rng);
  const std::int64_t modes = traj.dim(3);
  std::vector<double> probs;
  if (options.method == Method::kEstimator) {
    const auto heads = model.heads(encoded.embeddings);
    probs.assign(heads.probabilities.values().begin(), heads.probabilities.values().end());
  } else {
    probs.assign(static_cast<std::size_t>(encoded.inputs.agents * modes), 1.0 / static_cast<double>(modes));
  }
  auto global = model::to_global(traj, encoded.inputs, model.config().position_scale);
  for (std::int64_t r = 0; r < encoded.inputs.agents; ++r) {
    const auto& agent = scenario.agents[encoded.inputs.refs[static_cast<std::size_t>(r)].agent];
    AgentPrediction p;
    p.scenario_id = scenario.scenario_id;
    p.agent_id = agent.id;
    p.focal = agent.focal;
    p.probabilities.assign(probs.begin() + r * modes, probs.begin() + (r + 1) * modes);
    p.trajectories = std::move(global[static_cast<std::size_t>(r)]);
    out.agents.push_back(std::move(p));
  }
  out.meta.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<PredictionSet> infer_all(const model::AdmModel& model, std::span<const scene::Scenario> scenarios,
                                     const InferOptions& options) {
  std::vector<PredictionSet> out;
  out.reserve(scenarios.size());
  for (const auto& s : scenarios) out.push_back(infer(model, s, options));
  return out;
}

void write_predictions(const std::filesystem::path& path, std::span<const PredictionSet> sets) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& set : sets) {
    for (const auto& a : set.agents) {
      nlohmann::json modes = nlohmann::json::array();
      for (std::size_t k = 0; k < a.trajectories.size(); ++k) {
        nlohmann::json traj = nlohmann::json::array();
        for (const auto& p : a.trajectories[k]) traj.push_back({p.x, p.y});
        modes.push_back({{"prob", a.probabilities[k]}, {"trajectory", std::move(traj)}});
      }
      nlohmann::json rec{{"scenario_id", a.scenario_id},
                         {"agent_id", a.agent_id},
                         {"modes", std::move(modes)},
                         {"meta",
                          {{"method", set.meta.method},
                           {"gamma", set.meta.gamma},
                           {"sampler", set.meta.sampler},
                           {"seed", set.meta.seed},
                           {"elapsed_ms", set.meta.elapsed_ms}}}};
      if (a.focal) rec["focal"] = true;
      out << rec.dump() << '\n';
    }
  }
}

std::vector<PredictionSet> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw scene::DataError("cannot open predictions file " + path.string());
  std::vector<PredictionSet> sets;
  std::map<std::string, std::size_t> index;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const auto rec = nlohmann::json::parse(line);
      AgentPrediction a;
      a.scenario_id = rec.at("scenario_id").get<std::string>();
      a.agent_id = rec.at("agent_id").get<std::string>();
      a.focal = rec.value("focal", false);
      for (const auto& m : rec.at("modes")) {
        a.probabilities.push_back(m.at("prob").get<double>());
        std::vector<scene::Vec2> traj;
        for (const auto& p : m.at("trajectory")) traj.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        if (traj.size() != static_cast<std::size_t>(scene::kFutureSteps)) {
          throw scene::DataError(where + "trajectory has " + std::to_string(traj.size()) + " points, expected " +
                                 std::to_string(scene::kFutureSteps));
        }
        a.trajectories.push_back(std::move(traj));
      }
      if (a.trajectories.empty()) throw scene::DataError(where + "no modes");
      auto [it, fresh] = index.try_emplace(a.scenario_id, sets.size());
      if (fresh) {
        PredictionSet s;
        s.scenario_id = a.scenario_id;
        const auto& meta = rec.value("meta", nlohmann::json::object());
        s.meta.method = meta.value("method", std::string());
        s.meta.gamma = meta.value("gamma", 0);
        s.meta.sampler = meta.value("sampler", std::string());
        s.meta.seed = meta.value("seed", std::uint64_t{0});
        s.meta.elapsed_ms = meta.value("elapsed_ms", 0.0);
        sets.push_back(std::move(s));
      }
      sets[it->second].agents.push_back(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw scene::DataError(where + e.what());
    }
  }
  return sets;
}

}  // namespace adm::infer
