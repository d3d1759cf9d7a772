// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "adm/scene/synthetic.hpp"
#include "adm/trainer/losses.hpp"

namespace adm::train {

using dc::Tensor;

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"batch_size", c.batch_size},
          {"grad_clip", c.grad_clip},
          {"seed", c.seed},
          {"noise_draws", c.noise_draws},
          {"nll_weight", c.nll_weight},
          {"nll_snr_weighting", c.nll_snr_weighting},
          {"ce_weight", c.ce_weight},
          {"temperature", c.temperature},
          {"through_denoiser", c.through_denoiser},
          {"gamma", c.gamma},
          {"validation_draws", c.validation_draws}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.seed = j.value("seed", c.seed);
  c.noise_draws = j.value("noise_draws", c.noise_draws);
  c.nll_weight = j.value("nll_weight", c.nll_weight);
  c.nll_snr_weighting = j.value("nll_snr_weighting", c.nll_snr_weighting);
  c.ce_weight = j.value("ce_weight", c.ce_weight);
  c.temperature = j.value("temperature", c.temperature);
  c.through_denoiser = j.value("through_denoiser", c.through_denoiser);
  c.gamma = j.value("gamma", c.gamma);
  c.validation_draws = j.value("validation_draws", c.validation_draws);
  if (c.epochs < 0 || c.batch_size < 1 || c.noise_draws < 1 || c.gamma < 1 || c.validation_draws < 1) {
    throw std::invalid_argument("train config: epochs >= 0, batch_size, noise_draws, gamma, validation_draws >= 1");
  }
  return c;
}

namespace {

void require_data(std::span<const scene::Scenario> data, const char* what) {
  if (data.empty()) throw scene::DataError(std::string(what) + ": empty training set");
  for (const auto& s : data) {
    if (!s.has_futures()) throw scene::DataError(std::string(what) + ": scenario " + s.scenario_id + " lacks futures");
  }
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t count, int batch_size, std::mt19937_64& rng) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < count; i += static_cast<std::size_t>(batch_size)) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(count, i + batch_size)));
  }
  return batches;
}

std::vector<scene::Scenario> gather(std::span<const scene::Scenario> data, const std::vector<std::size_t>& idx) {
  std::vector<scene::Scenario> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data[i]);
  return out;
}

std::vector<int> draw_steps(std::int64_t rows, int total, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> step(1, total);
  std::vector<int> taus(static_cast<std::size_t>(rows));
  for (auto& t : taus) t = step(rng);
  return taus;
}

// Row indices 0..n-1 repeated `draws` times.
std::vector<std::int64_t> tiled_rows(std::int64_t n, int draws) {
  std::vector<std::int64_t> idx;
  idx.reserve(static_cast<std::size_t>(n * draws));
  for (int d = 0; d < draws; ++d) {
    for (std::int64_t i = 0; i < n; ++i) idx.push_back(i);
  }
  return idx;
}

struct Stage1Terms {
  Tensor eps_mse;
  Tensor nll;
};

Stage1Terms stage1_terms(const model::AdmModel& model, std::span<const scene::Scenario> batch, int draws,
                         std::mt19937_64& rng, bool snr_weighting) {
  const auto encoded = model.encode(batch);
  const double scale = model.config().position_scale;
  const auto n = encoded.inputs.agents;
  const auto rows = tiled_rows(n, draws);
  const auto steps = static_cast<std::int64_t>(scene::kFutureSteps);
  const Tensor a0 =
      dc::reshape(dc::index_select(model::future_targets(batch, encoded.inputs, scale), 0, rows), {n * draws, steps, 2, 1});
  const Tensor cond = dc::index_select(encoded.condition, 0, rows);
  const auto taus = draw_steps(n * draws, model.schedule().steps, rng);
  const Tensor noise = diff::standard_normal(a0.shape(), rng);
  const Tensor a_tau = diff::forward_sample(a0, taus, noise, model.schedule());
  const Tensor eps_hat = model.denoiser()(a_tau, taus, cond);

  Stage1Terms terms;
  terms.eps_mse = dc::mean(dc::square(eps_hat - noise));
  // Laplace NLL with unit scale on the one-step reconstruction, in meters.
  const Tensor x0 = diff::predict_x0(a_tau, taus, eps_hat, model.schedule());
  Tensor per_elem = dc::abs(x0 - a0) * scale + std::log(2.0);
  if (snr_weighting) {
    std::vector<double> w(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) w[i] = model.schedule().alpha_bar[taus[i]];
    per_elem = per_elem * Tensor::from_vector({n * draws, 1, 1, 1}, std::move(w));
  }
  terms.nll = dc::mean(per_elem);
  return terms;
}

}  // namespace

double validation_eps_mse(const model::AdmModel& model, std::span<const scene::Scenario> scenarios, int draws,
                          std::uint64_t seed) {
  if (scenarios.empty()) return 0.0;
  dc::NoGradGuard no_grad;
  std::mt19937_64 rng(seed);
  double total = 0.0;
  std::int64_t count = 0;
  constexpr std::size_t kChunk = 32;
  for (std::size_t i = 0; i < scenarios.size(); i += kChunk) {
    const auto chunk = scenarios.subspan(i, std::min(kChunk, scenarios.size() - i));
    const auto terms = stage1_terms(model, chunk, draws, rng, false);
    // Weight by chunk size so the mean is over all rows.
    std::int64_t agents = 0;
    for (const auto& s : chunk) agents += static_cast<std::int64_t>(s.agents.size());
    total += terms.eps_mse.item() * static_cast<double>(agents);
    count += agents;
  }
  return total / static_cast<double>(count);
}

std::vector<EpochLog> train_stage1(model::AdmModel& model, std::span<const scene::Scenario> train,
                                   std::span<const scene::Scenario> validation, const TrainConfig& config,
                                   const EpochCallback& on_epoch) {
  require_data(train, "train_stage1");
  auto& store = model.params();
  store.set_trainable("", false);
  store.set_trainable(model::kEncoderPrefix, true);
  store.set_trainable(model::kConditionPrefix, true);
  store.set_trainable(model::kDenoiserPrefix, true);

  std::mt19937_64 rng(scene::mix_seed(config.seed, 101));
  const std::uint64_t validation_seed = scene::mix_seed(config.seed, 202);
  std::vector<EpochLog> log;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLog e{1, epoch};
    const auto batches = make_batches(train.size(), config.batch_size, rng);
    for (const auto& idx : batches) {
      const auto batch = gather(train, idx);
      const auto terms = stage1_terms(model, batch, config.noise_draws, rng, config.nll_snr_weighting);
      const Tensor loss = terms.eps_mse + terms.nll * config.nll_weight;
      store.zero_grad();
      loss.backward();
      e.grad_norm += store.clip_grad_norm(config.grad_clip);
      dc::adamw_step(store, config.lr, config.weight_decay);
      e.loss += loss.item();
      e.eps_mse += terms.eps_mse.item();
      e.nll += terms.nll.item();
    }
    const double nb = static_cast<double>(batches.size());
    e.loss /= nb;
    e.eps_mse /= nb;
    e.nll /= nb;
    e.grad_norm /= nb;
    e.validation = validation_eps_mse(model, validation, config.validation_draws, validation_seed);
    log.push_back(e);
    if (on_epoch) on_epoch(e);
    if (!config.csv_log.empty()) write_log_csv(config.csv_log, log);
  }
  store.set_trainable("", true);
  return log;
}

namespace {

// Frozen embeddings of every agent row, computed once.
struct EmbeddingCache {
  Tensor local;   // [R, D]
  Tensor global;  // [R, D]
  Tensor condition;
  Tensor targets;  // [R, T_f, 2] normalized
  std::vector<std::pair<std::int64_t, std::int64_t>> scenario_rows;  // [begin, end) per scenario
};

EmbeddingCache build_cache(const model::AdmModel& model, std::span<const scene::Scenario> data) {
  dc::NoGradGuard no_grad;
  std::vector<Tensor> locals, globals, conds, targets;
  EmbeddingCache cache;
  std::int64_t row = 0;
  constexpr std::size_t kChunk = 32;
  for (std::size_t i = 0; i < data.size(); i += kChunk) {
    const auto chunk = data.subspan(i, std::min(kChunk, data.size() - i));
    const auto enc = model.encode(chunk);
    locals.push_back(enc.embeddings.local);
    globals.push_back(enc.embeddings.global);
    conds.push_back(enc.condition);
    targets.push_back(model::future_targets(chunk, enc.inputs, model.config().position_scale));
    for (const auto& s : chunk) {
      const auto n = static_cast<std::int64_t>(s.agents.size());
      cache.scenario_rows.emplace_back(row, row + n);
      row += n;
    }
  }
  cache.local = dc::concat(locals, 0);
  cache.global = dc::concat(globals, 0);
  cache.condition = dc::concat(conds, 0);
  cache.targets = dc::concat(targets, 0);
  return cache;
}

std::vector<std::int64_t> rows_of(const EmbeddingCache& cache, const std::vector<std::size_t>& scenarios) {
  std::vector<std::int64_t> rows;
  for (auto s : scenarios) {
    for (auto r = cache.scenario_rows[s].first; r < cache.scenario_rows[s].second; ++r) rows.push_back(r);
  }
  return rows;
}

// Runs the short deterministic chain gamma..1 on the prior, keeping the graph.
Tensor refine(const model::AdmModel& model, const Tensor& prior, const Tensor& cond, int gamma) {
  Tensor a = prior;
  for (int tau = gamma; tau >= 1; --tau) {
    a = diff::ddim_step(a, tau, tau - 1, model.denoiser()(a, tau, cond), model.schedule());
  }
  return a;
}

struct Stage2Terms {
  Tensor nll;
  Tensor ce;
  std::vector<double> errors;
  std::int64_t rows = 0;
};

Stage2Terms stage2_terms(const model::AdmModel& model, const EmbeddingCache& cache,
                         const std::vector<std::int64_t>& rows, const TrainConfig& config) {
  const double scale = model.config().position_scale;
  enc::Embeddings e{dc::index_select(cache.local, 0, rows), dc::index_select(cache.global, 0, rows)};
  Tensor traj = model.prior(e);
  if (config.through_denoiser) traj = refine(model, traj, dc::index_select(cache.condition, 0, rows), config.gamma);
  const Tensor gt = dc::index_select(cache.targets, 0, rows) * scale;
  const auto best = select_best(traj * scale, gt);
  const auto heads = model.heads(e);
  Stage2Terms t;
  t.nll = nll_laplace(gt, best.best, heads.laplace_scale);
  t.ce = soft_target_ce(best.errors, heads.logits, config.temperature);
  t.errors = best.errors;
  t.rows = static_cast<std::int64_t>(rows.size());
  return t;
}

double min_ade(const std::vector<double>& errors, std::int64_t rows) {
  const auto modes = static_cast<std::int64_t>(errors.size()) / rows;
  double sum = 0.0;
  for (std::int64_t r = 0; r < rows; ++r) {
    sum += *std::min_element(errors.begin() + r * modes, errors.begin() + (r + 1) * modes);
  }
  return sum / static_cast<double>(rows);
}

}  // namespace

std::vector<EpochLog> train_stage2(model::AdmModel& model, std::span<const scene::Scenario> train,
                                   std::span<const scene::Scenario> validation, const TrainConfig& config,
                                   const EpochCallback& on_epoch) {
  require_data(train, "train_stage2");
  if (model.config().prior == model::PriorKind::kNone) {
    throw std::invalid_argument("train_stage2: variant 'none' has no prior network to fit");
  }
  auto& store = model.params();
  store.set_trainable("", true);
  store.set_trainable(model::kEncoderPrefix, false);
  store.set_trainable(model::kConditionPrefix, false);
  store.set_trainable(model::kDenoiserPrefix, false);

  const auto cache = build_cache(model, train);
  const auto val_cache = validation.empty() ? EmbeddingCache{} : build_cache(model, validation);
  std::vector<std::int64_t> val_rows(static_cast<std::size_t>(validation.empty() ? 0 : val_cache.local.dim(0)));
  std::iota(val_rows.begin(), val_rows.end(), 0);

  std::mt19937_64 rng(scene::mix_seed(config.seed, 303));
  std::vector<EpochLog> log;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLog e{2, epoch};
    const auto batches = make_batches(train.size(), config.batch_size, rng);
    for (const auto& idx : batches) {
      const auto terms = stage2_terms(model, cache, rows_of(cache, idx), config);
      const Tensor loss = terms.nll + terms.ce * config.ce_weight;
      store.zero_grad();
      loss.backward();
      e.grad_norm += store.clip_grad_norm(config.grad_clip);
      dc::adamw_step(store, config.lr, config.weight_decay);
      e.loss += loss.item();
      e.nll += terms.nll.item();
      e.ce += terms.ce.item();
    }
    const double nb = static_cast<double>(batches.size());
    e.loss /= nb;
    e.nll /= nb;
    e.ce /= nb;
    e.grad_norm /= nb;
    if (!val_rows.empty()) {
      dc::NoGradGuard no_grad;
      const auto t = stage2_terms(model, val_cache, val_rows, config);
      e.validation = min_ade(t.errors, t.rows);
    }
    log.push_back(e);
    if (on_epoch) on_epoch(e);
    if (!config.csv_log.empty()) write_log_csv(config.csv_log, log);
  }
  store.set_trainable("", true);
  return log;
}

void write_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "stage,epoch,loss,eps_mse,nll,ce,grad_norm,validation\n";
  char buf[512];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", e.stage, e.epoch, e.loss, e.eps_mse,
                  e.nll, e.ce, e.grad_norm, e.validation);
    out << buf;
  }
}

std::vector<EpochLog> read_log_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<EpochLog> log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochLog e;
    char comma;
    std::istringstream row(line);
    row >> e.stage >> comma >> e.epoch >> comma >> e.loss >> comma >> e.eps_mse >> comma >> e.nll >> comma >> e.ce >>
        comma >> e.grad_norm >> comma >> e.validation;
    if (!row) throw std::runtime_error(path.string() + ": malformed log row '" + line + "'");
    log.push_back(e);
  }
  return log;
}

}  // namespace adm::train
