// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// adm: data generation, training, prediction and evaluation front end.
// Exit codes: 0 ok, 1 internal error, 2 bad arguments or configuration,
// 3 data error, 4 checkpoint error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "adm/scene/io.hpp"
#include "adm/scene/synthetic.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace adm;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kBadArgs = 2, kDataError = 3, kCheckpointError = 4 };

struct Globals {
  std::optional<std::uint64_t> seed;
  fs::path config;
  fs::path out_dir = ".";
};

tools::RunConfig resolve_config(const Globals& g) {
  auto c = tools::load_run_config(g.config);
  if (g.seed) {
    c.model.init_seed = *g.seed;
    c.stage1.seed = c.stage2.seed = c.ablation.stage2.seed = *g.seed;
    c.infer.seed = c.bench.seed = c.ablation.seed = *g.seed;
  }
  return c;
}

fs::path output(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return g.out_dir / name;
}

void print_epoch(const train::EpochLog& e) {
  if (e.stage == 1) {
    std::fprintf(stderr, "stage 1 epoch %3d  loss %.5f  eps-mse %.5f  nll %.4f  val eps-mse %.5f\n", e.epoch, e.loss,
                 e.eps_mse, e.nll, e.validation);
  } else {
    std::fprintf(stderr, "stage 2 epoch %3d  loss %.5f  nll %.4f  ce %.4f  val minADE %.4f\n", e.epoch, e.loss, e.nll,
                 e.ce, e.validation);
  }
}

void print_report(const eval::MetricReport& r) {
  std::printf("minADE        %.4f\nminFDE        %.4f\nMR            %.4f\nbrier-minFDE  %.4f\nagents        %lld\n",
              r.min_ade, r.min_fde, r.miss_rate, r.brier_min_fde, static_cast<long long>(r.agents));
}

model::LoadedModel load_checked(const fs::path& path, int min_stage) {
  auto loaded = model::load_model(path);
  if (loaded.stage < min_stage) {
    std::fprintf(stderr, "warning: %s is a stage-%d checkpoint; the prior network is untrained\n",
                 path.string().c_str(), loaded.stage);
  }
  return loaded;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated diffusion trajectory prediction"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for data, initialization, training and sampling");
  app.add_option("--config", g.config, "TOML configuration file");
  app.add_option("--out-dir", g.out_dir, "Directory for every output file");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate synthetic scenarios as JSONL");
  int gen_count = 2000;
  std::string gen_name = "data.jsonl";
  gen->add_option("--count", gen_count, "Number of scenarios")->check(CLI::PositiveNumber);
  gen->add_option("--name", gen_name, "Output file name inside --out-dir");

  // train
  auto* trn = app.add_subcommand("train", "Two-stage training");
  fs::path trn_data, trn_val, trn_init;
  std::string trn_stage = "both", trn_variant;
  trn->add_option("--data", trn_data, "Training scenarios (JSONL)")->required();
  trn->add_option("--val", trn_val, "Validation scenarios; default holds out the tail of --data");
  trn->add_option("--stage", trn_stage, "1, 2 or both")->check(CLI::IsMember({"1", "2", "both"}));
  trn->add_option("--init", trn_init, "Stage-1 checkpoint to start stage 2 from");
  trn->add_option("--variant", trn_variant, "Prior network: estimator, mlp or none")
      ->check(CLI::IsMember({"estimator", "mlp", "none"}));

  // predict
  auto* pred = app.add_subcommand("predict", "Predict K trajectories per agent");
  fs::path pred_ckpt, pred_data;
  std::string pred_method, pred_sampler, pred_labels, pred_name = "predictions.jsonl";
  int pred_steps = 0;
  pred->add_option("--checkpoint", pred_ckpt)->required();
  pred->add_option("--data", pred_data)->required();
  pred->add_option("--method", pred_method, "estimator, ddpm or ddim");
  pred->add_option("--steps", pred_steps, "gamma for the estimator path, chain length otherwise");
  pred->add_option("--sampler", pred_sampler, "Reverse step of the estimator path: ddpm or ddim");
  pred->add_option("--labels", pred_labels, "Step labels of the estimator path: literal or tail");
  pred->add_option("--name", pred_name, "Output file name inside --out-dir");

  // eval
  auto* evl = app.add_subcommand("eval", "Score predictions against ground truth");
  fs::path evl_pred, evl_data;
  bool focal_only = false;
  evl->add_option("--pred", evl_pred)->required();
  evl->add_option("--data", evl_data)->required();
  evl->add_flag("--focal-only", focal_only, "Score focal agents only");

  // bench-sampling
  auto* bench = app.add_subcommand("bench-sampling", "Accuracy and wall-clock of sampling schemes");
  fs::path bench_ckpt, bench_data;
  std::vector<std::string> bench_steps;
  int bench_timing = -1, bench_reps = -1, bench_metric = -2;
  bench->add_option("--checkpoint", bench_ckpt)->required();
  bench->add_option("--data", bench_data)->required();
  bench->add_option("--steps", bench_steps, "method:steps, repeatable (default: the full comparison set)");
  bench->add_option("--timing-scenarios", bench_timing);
  bench->add_option("--repetitions", bench_reps)->check(CLI::Range(5, 1000));
  bench->add_option("--metric-scenarios", bench_metric, "-1 for all");
  bench->add_flag("--focal-only", focal_only);

  // robustness
  auto* rob = app.add_subcommand("robustness", "Metrics under Gaussian observation noise");
  fs::path rob_ckpt, rob_data;
  std::string rob_sigma = "0:1:0.2";
  rob->add_option("--checkpoint", rob_ckpt)->required();
  rob->add_option("--data", rob_data)->required();
  rob->add_option("--sigma", rob_sigma, "start:stop:step or a comma list, meters");
  rob->add_flag("--focal-only", focal_only);

  // ablation
  auto* abl = app.add_subcommand("ablation", "Compare prior networks on a fraction of the training set");
  fs::path abl_ckpt, abl_data, abl_val;
  double abl_fraction = -1.0;
  std::vector<std::string> abl_variants;
  abl->add_option("--checkpoint", abl_ckpt, "Checkpoint providing the encoder and denoiser")->required();
  abl->add_option("--data", abl_data, "Training scenarios")->required();
  abl->add_option("--val", abl_val, "Evaluation scenarios")->required();
  abl->add_option("--fraction", abl_fraction);
  abl->add_option("--variant", abl_variants, "none:K, mlp or estimator; repeatable");
  abl->add_flag("--focal-only", focal_only);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return kOk;
    std::cerr << app.help();
    return kBadArgs;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    auto cfg = resolve_config(g);
    eval::EvalOptions eval_opts{focal_only};

    if (*gen) {
      const auto data = scene::generate_synthetic(gen_count, g.seed.value_or(0));
      const auto path = output(g, gen_name);
      scene::save_scenarios(path, data);
      std::printf("wrote %d scenarios to %s\n", gen_count, path.string().c_str());
    } else if (*trn) {
      auto data = scene::load_scenarios(trn_data);
      std::vector<scene::Scenario> val;
      if (!trn_val.empty()) {
        val = scene::load_scenarios(trn_val);
      } else {
        const auto held = static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(data.size()));
        val.assign(data.end() - static_cast<std::ptrdiff_t>(held), data.end());
        data.resize(data.size() - held);
      }
      if (!trn_variant.empty()) cfg.model.prior = model::parse_prior_kind(trn_variant);
      std::unique_ptr<model::AdmModel> m;
      int stage = 0;
      if (trn_stage == "2") {
        if (trn_init.empty()) throw dc::CheckpointError("stage 2 needs a stage-1 checkpoint (--init)");
        auto loaded = model::load_model(trn_init);
        if (loaded.stage < 1) throw dc::CheckpointError(trn_init.string() + " has not completed stage 1");
        m = std::move(loaded.model);
        stage = 1;
      } else {
        m = std::make_unique<model::AdmModel>(cfg.model);
        cfg.stage1.csv_log = output(g, "stage1_log.csv");
        train::train_stage1(*m, data, val, cfg.stage1, print_epoch);
        stage = 1;
        m->save(output(g, "stage1.ckpt"), {{"stage", 1}, {"train", train::to_json(cfg.stage1)}});
      }
      if (trn_stage != "1" && m->config().prior != model::PriorKind::kNone) {
        cfg.stage2.csv_log = output(g, "stage2_log.csv");
        train::train_stage2(*m, data, val, cfg.stage2, print_epoch);
        stage = 2;
        m->save(output(g, "stage2.ckpt"), {{"stage", 2}, {"train", train::to_json(cfg.stage2)}});
      }
      std::printf("trained through stage %d; checkpoints in %s\n", stage, g.out_dir.string().c_str());
    } else if (*pred) {
      auto loaded = load_checked(pred_ckpt, 2);
      const auto data = scene::load_scenarios(pred_data);
      auto opts = cfg.infer;
      if (!pred_method.empty()) opts.method = infer::parse_method(pred_method);
      if (pred_steps > 0) opts.steps = pred_steps;
      if (!pred_sampler.empty()) opts.sampler = diff::parse_sampler(pred_sampler);
      if (!pred_labels.empty()) opts.labels = infer::parse_step_labels(pred_labels);
      const auto sets = infer::infer_all(*loaded.model, data, opts);
      const auto path = output(g, pred_name);
      infer::write_predictions(path, sets);
      std::printf("wrote predictions for %zu scenarios to %s\n", sets.size(), path.string().c_str());
    } else if (*evl) {
      const auto sets = infer::read_predictions(evl_pred);
      const auto data = scene::load_scenarios(evl_data);
      const auto report = eval::compute_metrics(sets, data, eval_opts);
      eval::write_report_csv(output(g, "report.csv"), report);
      print_report(report);
    } else if (*bench) {
      auto loaded = load_checked(bench_ckpt, 2);
      const auto data = scene::load_scenarios(bench_data);
      auto opts = cfg.bench;
      if (!bench_steps.empty()) {
        opts.specs.clear();
        for (const auto& s : bench_steps) opts.specs.push_back(eval::parse_sampling_spec(s));
      }
      if (bench_timing > 0) opts.timing_scenarios = bench_timing;
      if (bench_reps > 0) opts.repetitions = bench_reps;
      if (bench_metric >= -1) opts.metric_scenarios = bench_metric;
      opts.eval = eval_opts;
      const auto rows = eval::bench_sampling(*loaded.model, data, opts);
      eval::write_bench_metrics_csv(output(g, "bench_metrics.csv"), rows);
      eval::write_bench_timing_csv(output(g, "bench_timing.csv"), rows);
      const auto table = eval::bench_table(rows);
      std::ofstream(output(g, "bench_table.txt")) << table;
      std::fputs(table.c_str(), stdout);
    } else if (*rob) {
      auto loaded = load_checked(rob_ckpt, 2);
      const auto data = scene::load_scenarios(rob_data);
      const auto sigmas = eval::parse_sigmas(rob_sigma);
      const auto rows = eval::robustness_sweep(*loaded.model, data, sigmas, cfg.infer, eval_opts);
      eval::write_robustness_csv(output(g, "robustness.csv"), rows);
      eval::write_robustness_svg(output(g, "robustness.svg"), rows);
      for (const auto& r : rows) {
        std::printf("sigma %.2f  minADE %.4f  minFDE %.4f  MR %.4f  brier-minFDE %.4f\n", r.sigma, r.metrics.min_ade,
                    r.metrics.min_fde, r.metrics.miss_rate, r.metrics.brier_min_fde);
      }
    } else if (*abl) {
      auto loaded = model::load_model(abl_ckpt);
      if (loaded.stage < 1) throw dc::CheckpointError(abl_ckpt.string() + " has not completed stage 1");
      const auto data = scene::load_scenarios(abl_data);
      const auto val = scene::load_scenarios(abl_val);
      auto opts = cfg.ablation;
      if (abl_fraction > 0.0) opts.fraction = abl_fraction;
      if (!abl_variants.empty()) {
        opts.variants.clear();
        for (const auto& v : abl_variants) opts.variants.push_back(eval::parse_ablation_variant(v));
      }
      opts.eval = eval_opts;
      const auto rows = eval::run_ablation(*loaded.model, data, val, opts);
      eval::write_ablation_csv(output(g, "ablation.csv"), rows);
      const auto table = eval::ablation_table(rows);
      std::ofstream(output(g, "ablation_table.txt")) << table;
      std::fputs(table.c_str(), stdout);
    }
  } catch (const tools::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadArgs;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadArgs;
  } catch (const scene::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataError;
  } catch (const dc::CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
    return kCheckpointError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInternal;
  }
  return kOk;
}
