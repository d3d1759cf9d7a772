// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Sampling benchmark, observation-noise sweep and prior ablation, with their
// CSV, text-table and SVG emitters.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "adm/eval/metrics.hpp"
#include "adm/trainer/trainer.hpp"

namespace adm::eval {

// ---- sampling benchmark

struct SamplingSpec {
  infer::Method method = infer::Method::kEstimator;
  int steps = 5;
};

// "ddim:5" -> {kDdim, 5}. Throws std::invalid_argument.
SamplingSpec parse_sampling_spec(const std::string& text);
std::string to_string(const SamplingSpec& s);

// ddpm:T, ddim:50/30/20/5, estimator:5.
std::vector<SamplingSpec> default_sampling_specs(int total_steps);

struct BenchOptions {
  std::vector<SamplingSpec> specs;
  std::uint64_t seed = 0;
  diff::Sampler estimator_sampler = diff::Sampler::ddpm;
  int metric_scenarios = -1;       // leading scenarios scored per row; -1: all
  int full_chain_metric_scenarios = 8;  // cap for rows with more than 100 steps
  int timing_scenarios = 2;
  int repetitions = 5;
  EvalOptions eval;
};

struct BenchRow {
  SamplingSpec spec;
  MetricReport metrics;
  std::int64_t denoiser_calls = 0;  // per scenario
  double median_ms = 0.0;           // per scenario, median over repetitions
  double min_ms = 0.0;
  double max_ms = 0.0;
  int repetitions = 0;
};

std::vector<BenchRow> bench_sampling(const model::AdmModel& model, std::span<const scene::Scenario> scenarios,
                                     const BenchOptions& options);

// Metric columns only, so repeated runs produce identical files.
void write_bench_metrics_csv(const std::filesystem::path& path, std::span<const BenchRow> rows);
void write_bench_timing_csv(const std::filesystem::path& path, std::span<const BenchRow> rows);
std::string bench_table(std::span<const BenchRow> rows);

// ---- robustness sweep

// "0:1:0.2" -> {0, 0.2, ..., 1.0}; also accepts a comma list.
std::vector<double> parse_sigmas(const std::string& text);
std::vector<double> default_sigmas();

struct RobustnessRow {
  double sigma = 0.0;
  MetricReport metrics;
};

// Throws std::invalid_argument on a negative sigma.
std::vector<RobustnessRow> robustness_sweep(const model::AdmModel& model, std::span<const scene::Scenario> scenarios,
                                            std::span<const double> sigmas, const infer::InferOptions& options,
                                            const EvalOptions& eval = {});

void write_robustness_csv(const std::filesystem::path& path, std::span<const RobustnessRow> rows);
std::vector<RobustnessRow> read_robustness_csv(const std::filesystem::path& path);
void write_robustness_svg(const std::filesystem::path& path, std::span<const RobustnessRow> rows);

// ---- prior ablation

struct AblationVariant {
  model::PriorKind prior = model::PriorKind::kEstimator;
  int modes = 6;
};

// none with K in {6, 20, 40}, mlp, estimator.
std::vector<AblationVariant> default_ablation_variants();
AblationVariant parse_ablation_variant(const std::string& text);  // "none:20", "mlp", "estimator"

struct AblationOptions {
  double fraction = 0.2;
  std::vector<AblationVariant> variants;
  train::TrainConfig stage2;
  int gamma = 5;
  diff::Sampler estimator_sampler = diff::Sampler::ddpm;
  int baseline_steps = 20;  // DDIM steps for the variants without a prior network
  std::uint64_t seed = 0;
  EvalOptions eval;
};

struct AblationRow {
  AblationVariant variant;
  std::int64_t prior_parameters = 0;
  std::string sampling;
  MetricReport metrics;
};

// Reuses the encoder and denoiser of `backbone`; prior networks are fitted on
// the leading `fraction` of `train_set` and scored on `validation`.
std::vector<AblationRow> run_ablation(const model::AdmModel& backbone, std::span<const scene::Scenario> train_set,
                                      std::span<const scene::Scenario> validation, const AblationOptions& options);

void write_ablation_csv(const std::filesystem::path& path, std::span<const AblationRow> rows);
std::string ablation_table(std::span<const AblationRow> rows);

// ---- plain metric reports

void write_report_csv(const std::filesystem::path& path, const MetricReport& report);
MetricReport read_report_csv(const std::filesystem::path& path);

// Shared-format helpers: fixed precision so that equal values print equally.
std::string format_number(double v);

}  // namespace adm::eval
