// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/eval/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "adm/scene/synthetic.hpp"

namespace adm::eval {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument("bad number '" + s + "' in " + what);
  return v;
}

int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_double(s, what);
  if (v != std::floor(v)) throw std::invalid_argument("expected an integer, got '" + s + "' in " + what);
  return static_cast<int>(v);
}

std::string metric_cells(const MetricReport& m) {
  return format_number(m.min_ade) + "," + format_number(m.min_fde) + "," + format_number(m.miss_rate) + "," +
         format_number(m.brier_min_fde) + "," + std::to_string(m.agents) + "," + std::to_string(m.scenarios);
}

constexpr const char* kMetricHeader = "min_ade,min_fde,miss_rate,brier_min_fde,agents,scenarios";

MetricReport parse_metric_cells(const std::vector<std::string>& cells, std::size_t first, const std::string& where) {
  if (cells.size() < first + 6) throw std::runtime_error(where + ": too few columns");
  MetricReport m;
  m.min_ade = parse_double(cells[first], where);
  m.min_fde = parse_double(cells[first + 1], where);
  m.miss_rate = parse_double(cells[first + 2], where);
  m.brier_min_fde = parse_double(cells[first + 3], where);
  m.agents = parse_int(cells[first + 4], where);
  m.scenarios = parse_int(cells[first + 5], where);
  return m;
}

std::span<const scene::Scenario> leading(std::span<const scene::Scenario> s, int count) {
  if (count < 0 || static_cast<std::size_t>(count) >= s.size()) return s;
  return s.first(static_cast<std::size_t>(count));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

SamplingSpec parse_sampling_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("sampling spec must be method:steps, got '" + text + "'");
  SamplingSpec s;
  s.method = infer::parse_method(text.substr(0, colon));
  s.steps = parse_int(text.substr(colon + 1), "sampling spec '" + text + "'");
  if (s.steps < 1) throw std::invalid_argument("sampling spec '" + text + "': steps must be >= 1");
  return s;
}

std::string to_string(const SamplingSpec& s) { return infer::to_string(s.method) + ":" + std::to_string(s.steps); }

std::vector<SamplingSpec> default_sampling_specs(int total_steps) {
  using infer::Method;
  return {{Method::kDdpm, total_steps}, {Method::kDdim, 50}, {Method::kDdim, 30},
          {Method::kDdim, 20},          {Method::kDdim, 5},  {Method::kEstimator, 5}};
}

std::vector<BenchRow> bench_sampling(const model::AdmModel& model, std::span<const scene::Scenario> scenarios,
                                     const BenchOptions& options) {
  if (scenarios.empty()) throw scene::DataError("bench_sampling: no scenarios");
  if (options.repetitions < 1 || options.timing_scenarios < 1) {
    throw std::invalid_argument("bench_sampling: repetitions and timing_scenarios must be >= 1");
  }
  std::vector<BenchRow> rows;
  for (const auto& spec : options.specs) {
    infer::InferOptions io;
    io.method = spec.method;
    io.steps = spec.steps;
    io.seed = options.seed;
    io.sampler = options.estimator_sampler;
    BenchRow row;
    row.spec = spec;

    int limit = options.metric_scenarios;
    if (spec.steps > 100) {
      limit = limit < 0 ? options.full_chain_metric_scenarios : std::min(limit, options.full_chain_metric_scenarios);
    }
    const auto scored = leading(scenarios, limit);
    model.denoiser().reset_invocations();
    const auto predictions = infer::infer_all(model, scored, io);
    row.denoiser_calls = model.denoiser().invocations() / static_cast<std::int64_t>(scored.size());
    row.metrics = compute_metrics(predictions, scored, options.eval);

    const auto timed = leading(scenarios, options.timing_scenarios);
    infer::infer(model, timed.front(), io);  // warm-up, not recorded
    std::vector<double> per_scenario;
    for (int rep = 0; rep < options.repetitions; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      for (const auto& s : timed) infer::infer(model, s, io);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      per_scenario.push_back(ms / static_cast<double>(timed.size()));
    }
    row.median_ms = median(per_scenario);
    row.min_ms = *std::min_element(per_scenario.begin(), per_scenario.end());
    row.max_ms = *std::max_element(per_scenario.begin(), per_scenario.end());
    row.repetitions = options.repetitions;
    rows.push_back(row);
  }
  return rows;
}

void write_bench_metrics_csv(const std::filesystem::path& path, std::span<const BenchRow> rows) {
  auto out = open_out(path);
  out << "method,steps,denoiser_calls," << kMetricHeader << '\n';
  for (const auto& r : rows) {
    out << infer::to_string(r.spec.method) << ',' << r.spec.steps << ',' << r.denoiser_calls << ','
        << metric_cells(r.metrics) << '\n';
  }
}

void write_bench_timing_csv(const std::filesystem::path& path, std::span<const BenchRow> rows) {
  auto out = open_out(path);
  out << "method,steps,denoiser_calls,median_ms,min_ms,max_ms,repetitions\n";
  for (const auto& r : rows) {
    out << infer::to_string(r.spec.method) << ',' << r.spec.steps << ',' << r.denoiser_calls << ','
        << format_number(r.median_ms) << ',' << format_number(r.min_ms) << ',' << format_number(r.max_ms) << ','
        << r.repetitions << '\n';
  }
}

std::string bench_table(std::span<const BenchRow> rows) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %6s %8s %8s %8s %6s %8s %12s\n", "method", "steps", "calls", "minADE", "minFDE",
                "MR", "scored", "median ms");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-10s %6d %8lld %8.3f %8.3f %6.3f %8lld %12.1f\n",
                  infer::to_string(r.spec.method).c_str(), r.spec.steps, static_cast<long long>(r.denoiser_calls),
                  r.metrics.min_ade, r.metrics.min_fde, r.metrics.miss_rate,
                  static_cast<long long>(r.metrics.scenarios), r.median_ms);
    os << buf;
  }
  return os.str();
}

std::vector<double> default_sigmas() { return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}; }

std::vector<double> parse_sigmas(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw std::invalid_argument("sigma range must be start:stop:step, got '" + text + "'");
    const double start = parse_double(parts[0], "sigma range");
    const double stop = parse_double(parts[1], "sigma range");
    const double step = parse_double(parts[2], "sigma range");
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("sigma range '" + text + "' is empty");
    // Index-based so that 0:1:0.2 yields exactly six values.
    const auto count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) out.push_back(std::round((start + i * step) * 1e12) / 1e12);
  } else {
    for (const auto& p : split(text, ',')) out.push_back(parse_double(p, "sigma list"));
  }
  for (double s : out) {
    if (s < 0.0) throw std::invalid_argument("sigma must be non-negative, got " + format_number(s));
  }
  if (out.empty()) throw std::invalid_argument("no sigma values in '" + text + "'");
  return out;
}

std::vector<RobustnessRow> robustness_sweep(const model::AdmModel& model, std::span<const scene::Scenario> scenarios,
                                            std::span<const double> sigmas, const infer::InferOptions& options,
                                            const EvalOptions& eval) {
  for (double s : sigmas) {
    if (s < 0.0) throw std::invalid_argument("robustness_sweep: negative sigma " + format_number(s));
  }
  std::vector<RobustnessRow> rows;
  for (double sigma : sigmas) {
    std::vector<scene::Scenario> noisy;
    noisy.reserve(scenarios.size());
    for (const auto& s : scenarios) {
      noisy.push_back(
          scene::inject_noise(s, sigma, infer::scenario_seed(scene::mix_seed(options.seed, 404), s.scenario_id)));
    }
    rows.push_back({sigma, compute_metrics(infer::infer_all(model, noisy, options), noisy, eval)});
  }
  return rows;
}

void write_robustness_csv(const std::filesystem::path& path, std::span<const RobustnessRow> rows) {
  auto out = open_out(path);
  out << "sigma," << kMetricHeader << '\n';
  for (const auto& r : rows) out << format_number(r.sigma) << ',' << metric_cells(r.metrics) << '\n';
}

std::vector<RobustnessRow> read_robustness_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<RobustnessRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    rows.push_back({parse_double(cells.at(0), path.string()), parse_metric_cells(cells, 1, path.string())});
  }
  return rows;
}

void write_robustness_svg(const std::filesystem::path& path, std::span<const RobustnessRow> rows) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 150, kTop = 30, kBottom = 60;
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;
  double max_sigma = 1e-9, max_metric = 1e-9;
  for (const auto& r : rows) {
    max_sigma = std::max(max_sigma, r.sigma);
    max_metric = std::max({max_metric, r.metrics.min_ade, r.metrics.min_fde, r.metrics.brier_min_fde});
  }
  max_metric *= 1.1;
  auto x_of = [&](double s) { return kLeft + plot_w * s / max_sigma; };
  auto y_of = [&](double m) { return kTop + plot_h * (1.0 - m / max_metric); };
  auto out = open_out(path);
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n"
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                kLeft, kTop + plot_h, kLeft + plot_w, kTop + plot_h, kLeft, kTop, kLeft, kTop + plot_h);
  out << buf;
  for (int i = 0; i <= 5; ++i) {
    const double m = max_metric * i / 5.0;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.2f</text>\n",
                  kLeft, y_of(m), kLeft + plot_w, y_of(m), kLeft - 6, y_of(m) + 4, m);
    out << buf;
  }
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.1f</text>\n", x_of(r.sigma),
                  kTop + plot_h + 18, r.sigma);
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">observation noise sigma (m)</text>\n"
                "<text x=\"18\" y=\"%.1f\" transform=\"rotate(-90 18 %.1f)\" text-anchor=\"middle\">error (m)</text>\n",
                kLeft + plot_w / 2, kH - 15, kTop + plot_h / 2, kTop + plot_h / 2);
  out << buf;
  struct Series {
    const char* name;
    const char* color;
    double MetricReport::*field;
  };
  const Series series[] = {{"minADE", "#1f77b4", &MetricReport::min_ade},
                           {"minFDE", "#d62728", &MetricReport::min_fde},
                           {"brier-minFDE", "#2ca02c", &MetricReport::brier_min_fde}};
  int legend = 0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x_of(r.sigma), y_of(r.metrics.*s.field));
      out << buf;
    }
    out << "\"/>\n";
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n", x_of(r.sigma),
                    y_of(r.metrics.*s.field), s.color);
      out << buf;
    }
    const double ly = kTop + 10 + 20 * legend++;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" stroke-width=\"2\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\">%s</text>\n",
                  kLeft + plot_w + 15, ly, kLeft + plot_w + 40, ly, s.color, kLeft + plot_w + 46, ly + 4, s.name);
    out << buf;
  }
  out << "</svg>\n";
}

std::vector<AblationVariant> default_ablation_variants() {
  using model::PriorKind;
  return {{PriorKind::kNone, 6}, {PriorKind::kNone, 20}, {PriorKind::kNone, 40}, {PriorKind::kMlp, 6},
          {PriorKind::kEstimator, 6}};
}

AblationVariant parse_ablation_variant(const std::string& text) {
  const auto colon = text.find(':');
  AblationVariant v;
  v.prior = model::parse_prior_kind(text.substr(0, colon));
  if (colon != std::string::npos) v.modes = parse_int(text.substr(colon + 1), "ablation variant '" + text + "'");
  if (v.modes < 1) throw std::invalid_argument("ablation variant '" + text + "': K must be >= 1");
  return v;
}

std::vector<AblationRow> run_ablation(const model::AdmModel& backbone, std::span<const scene::Scenario> train_set,
                                      std::span<const scene::Scenario> validation, const AblationOptions& options) {
  if (!(options.fraction > 0.0 && options.fraction <= 1.0)) {
    throw std::invalid_argument("ablation fraction must lie in (0, 1]");
  }
  const auto subset_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(options.fraction * static_cast<double>(train_set.size()))));
  const auto subset = train_set.first(std::min(subset_size, train_set.size()));
  std::vector<AblationRow> rows;
  for (const auto& v : options.variants) {
    auto cfg = backbone.config();
    cfg.prior = v.prior;
    cfg.estimator.modes = v.modes;
    model::AdmModel m(cfg);
    model::transfer_backbone(backbone, m);
    infer::InferOptions io;
    io.seed = options.seed;
    if (v.prior == model::PriorKind::kNone) {
      io.method = infer::Method::kDdim;
      io.steps = options.baseline_steps;
    } else {
      train::train_stage2(m, subset, {}, options.stage2);
      io.method = infer::Method::kEstimator;
      io.steps = options.gamma;
      io.sampler = options.estimator_sampler;
    }
    AblationRow row;
    row.variant = v;
    row.prior_parameters = m.prior_parameter_count();
    row.sampling = infer::to_string(io.method) + ":" + std::to_string(io.steps);
    row.metrics = compute_metrics(infer::infer_all(m, validation, io), validation, options.eval);
    rows.push_back(row);
  }
  return rows;
}

void write_ablation_csv(const std::filesystem::path& path, std::span<const AblationRow> rows) {
  auto out = open_out(path);
  out << "variant,modes,prior_parameters,sampling," << kMetricHeader << '\n';
  for (const auto& r : rows) {
    out << model::to_string(r.variant.prior) << ',' << r.variant.modes << ',' << r.prior_parameters << ','
        << r.sampling << ',' << metric_cells(r.metrics) << '\n';
  }
}

std::string ablation_table(std::span<const AblationRow> rows) {
  std::ostringstream os;
  os << pad("variant", 10) << pad("K", 5) << pad("params", 10) << pad("sampling", 14) << pad("minADE", 9)
     << pad("minFDE", 9) << pad("MR", 7) << '\n';
  char buf[64];
  for (const auto& r : rows) {
    os << pad(model::to_string(r.variant.prior), 10) << pad(std::to_string(r.variant.modes), 5)
       << pad(std::to_string(r.prior_parameters), 10) << pad(r.sampling, 14);
    std::snprintf(buf, sizeof buf, "%9.3f%9.3f%7.3f\n", r.metrics.min_ade, r.metrics.min_fde, r.metrics.miss_rate);
    os << buf;
  }
  return os.str();
}

void write_report_csv(const std::filesystem::path& path, const MetricReport& report) {
  auto out = open_out(path);
  out << kMetricHeader << '\n' << metric_cells(report) << '\n';
}

MetricReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string header, line;
  std::getline(in, header);
  if (header != kMetricHeader) throw std::runtime_error(path.string() + ": unexpected header '" + header + "'");
  std::getline(in, line);
  return parse_metric_cells(split(line, ','), 0, path.string());
}

}  // namespace adm::eval
