// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Drives the adm executable end to end with the smoke configuration.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "run_config.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "adm_test_cli";

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Run run_adm(const std::string& args) {
  const auto out = kWork / "stdout.txt";
  const auto err = kWork / "stderr.txt";
  const std::string cmd = std::string(ADM_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string smoke() { return std::string("--config ") + ADM_SMOKE_CONFIG + " --seed 3 --out-dir " + kWork.string(); }

// Predictions carry their own wall-clock time; everything else must match.
std::string without_timing(const std::string& s) {
  static const std::regex elapsed("\"elapsed_ms\":[-+.eE0-9]+");
  return std::regex_replace(s, elapsed, "\"elapsed_ms\":0");
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

// Trains once and reuses the checkpoint across test cases.
const fs::path& trained() {
  static const fs::path ckpt = [] {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    REQUIRE(run_adm(smoke() + " gen-data --count 24").code == 0);
    REQUIRE(run_adm(smoke() + " gen-data --count 6 --name val.jsonl").code == 0);
    const auto r = run_adm(smoke() + " train --data " + (kWork / "data.jsonl").string() + " --val " +
                       (kWork / "val.jsonl").string());
    INFO(r.err);
    REQUIRE(r.code == 0);
    return kWork / "stage2.ckpt";
  }();
  return ckpt;
}

std::string val() { return (kWork / "val.jsonl").string(); }

}  // namespace

TEST_CASE("unknown subcommand prints usage and exits 2") {
  fs::create_directories(kWork);
  const auto r = run_adm("frobnicate");
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run_adm("").code == 2);
  CHECK(run_adm("eval --pred").code == 2);
}

TEST_CASE("configuration errors exit 2") {
  fs::create_directories(kWork);
  const auto bad = kWork / "bad.toml";
  std::ofstream(bad) << "[model]\nwidth = 3\n";
  CHECK(run_adm("--config " + bad.string() + " gen-data --count 1").code == 2);
  std::ofstream(bad) << "[model\n";
  CHECK(run_adm("--config " + bad.string() + " gen-data --count 1").code == 2);
  CHECK(run_adm("--config " + (kWork / "missing.toml").string() + " gen-data --count 1").code == 2);
}

TEST_CASE("smoke configuration parses") {
  const auto c = adm::tools::load_run_config(ADM_SMOKE_CONFIG);
  CHECK(c.model.encoder.dim == 32);
  CHECK(c.model.diffusion_steps == 100);
  CHECK(c.bench.specs.size() == 3);
  CHECK(c.ablation.stage2.epochs == 1);
  const auto d = adm::tools::load_run_config(ADM_DESK_CONFIG);
  CHECK(d.model.diffusion_steps == 1000);
  CHECK(d.bench.specs.size() == 6);
}

TEST_CASE("data and checkpoint errors map to exit codes 3 and 4") {
  const auto& ckpt = trained();
  CHECK(run_adm(smoke() + " eval --pred " + (kWork / "none.jsonl").string() + " --data " + val()).code == 3);
  CHECK(run_adm(smoke() + " predict --checkpoint " + (kWork / "none.ckpt").string() + " --data " + val()).code == 4);
  CHECK(run_adm(smoke() + " train --stage 2 --data " + val()).code == 4);
  const auto garbage = kWork / "garbage.jsonl";
  std::ofstream(garbage) << "{\"not\": \"a scenario\"}\n";
  CHECK(run_adm(smoke() + " predict --checkpoint " + ckpt.string() + " --data " + garbage.string()).code == 3);
  CHECK(run_adm(smoke() + " robustness --sigma=-1 --checkpoint " + ckpt.string() + " --data " + val()).code == 2);
}

TEST_CASE("train writes both stages and logs") {
  trained();
  CHECK(fs::exists(kWork / "stage1.ckpt"));
  CHECK(fs::exists(kWork / "stage2.ckpt"));
  CHECK(count_lines(slurp(kWork / "stage1_log.csv")) == 3);
  CHECK(count_lines(slurp(kWork / "stage2_log.csv")) == 3);
}

TEST_CASE("predict then eval prints four metrics and writes report.csv") {
  const auto& ckpt = trained();
  REQUIRE(run_adm(smoke() + " predict --checkpoint " + ckpt.string() + " --data " + val()).code == 0);
  const auto r = run_adm(smoke() + " eval --pred " + (kWork / "predictions.jsonl").string() + " --data " + val());
  REQUIRE(r.code == 0);
  for (const char* m : {"minADE", "minFDE", "MR", "brier-minFDE"}) CHECK(r.out.find(m) != std::string::npos);
  const auto first = slurp(kWork / "report.csv");
  CHECK(count_lines(first) == 2);

  // Same seed and config: byte-identical predictions and report.
  const auto preds = without_timing(slurp(kWork / "predictions.jsonl"));
  REQUIRE(run_adm(smoke() + " predict --checkpoint " + ckpt.string() + " --data " + val()).code == 0);
  REQUIRE(run_adm(smoke() + " eval --pred " + (kWork / "predictions.jsonl").string() + " --data " + val()).code == 0);
  CHECK(without_timing(slurp(kWork / "predictions.jsonl")) == preds);
  CHECK(slurp(kWork / "report.csv") == first);
  REQUIRE(run_adm(smoke() + " eval --focal-only --pred " + (kWork / "predictions.jsonl").string() + " --data " + val())
              .code == 0);
}

TEST_CASE("bench-sampling with two specs emits a two-row table") {
  const auto& ckpt = trained();
  const auto r = run_adm(smoke() + " bench-sampling --steps ddim:5 --steps estimator:5 --checkpoint " + ckpt.string() +
                     " --data " + val());
  REQUIRE(r.code == 0);
  CHECK(count_lines(slurp(kWork / "bench_metrics.csv")) == 3);
  CHECK(count_lines(slurp(kWork / "bench_timing.csv")) == 3);
  const auto table = slurp(kWork / "bench_table.txt");
  CHECK(table == r.out);
  CHECK(table.find("ddim") != std::string::npos);
  CHECK(table.find("estimator") != std::string::npos);
  CHECK(run_adm(smoke() + " bench-sampling --steps ddim:0 --checkpoint " + ckpt.string() + " --data " + val()).code == 2);
}

TEST_CASE("robustness expands the sigma range to six rows") {
  const auto& ckpt = trained();
  const auto r = run_adm(smoke() + " robustness --sigma 0:1:0.2 --checkpoint " + ckpt.string() + " --data " + val());
  REQUIRE(r.code == 0);
  CHECK(count_lines(slurp(kWork / "robustness.csv")) == 7);
  CHECK(slurp(kWork / "robustness.svg").find("<svg") != std::string::npos);
}

TEST_CASE("ablation reports every variant") {
  trained();
  const auto r = run_adm(smoke() + " ablation --variant none:6 --variant estimator --checkpoint " +
                     (kWork / "stage1.ckpt").string() + " --data " + (kWork / "data.jsonl").string() + " --val " +
                     val());
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(count_lines(slurp(kWork / "ablation.csv")) == 3);
  CHECK(run_adm(smoke() + " ablation --variant bogus --checkpoint " + (kWork / "stage1.ckpt").string() + " --data " +
            val() + " --val " + val())
            .code == 2);
}
