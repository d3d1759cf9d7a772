// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/diffusion/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adm::diff {

using dc::Tensor;

void NoiseSchedule::check_step(int tau, const char* op, int lowest) const {
  if (tau < lowest || tau > steps) {
    throw std::out_of_range(std::string(op) + ": step " + std::to_string(tau) + " outside [" +
                            std::to_string(lowest) + ", " + std::to_string(steps) + "]");
  }
}

NoiseSchedule make_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw std::invalid_argument("make_schedule: need at least one step, got " + std::to_string(steps));
  const double scale = 1000.0 / steps;
  NoiseSchedule s;
  s.steps = steps;
  s.beta.assign(static_cast<std::size_t>(steps) + 1, 0.0);
  s.alpha.assign(s.beta.size(), 1.0);
  s.alpha_bar.assign(s.beta.size(), 1.0);
  for (int t = 1; t <= steps; ++t) {
    const double frac = steps == 1 ? 1.0 : static_cast<double>(t - 1) / (steps - 1);
    const double b = std::min(0.999, scale * (beta_start + (beta_end - beta_start) * frac));
    s.beta[t] = b;
    s.alpha[t] = 1.0 - b;
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
  }
  return s;
}

Sampler parse_sampler(const std::string& name) {
  if (name == "ddpm") return Sampler::ddpm;
  if (name == "ddim") return Sampler::ddim;
  throw std::invalid_argument("unknown sampler '" + name + "' (expected ddpm or ddim)");
}

const char* to_string(Sampler s) { return s == Sampler::ddpm ? "ddpm" : "ddim"; }

namespace {

// Per-row coefficients shaped [N, 1, ..., 1] to broadcast against x.
Tensor row_coefficients(const Tensor& x, std::span<const int> taus, const NoiseSchedule& schedule, const char* op,
                        double (*f)(const NoiseSchedule&, int)) {
  if (x.rank() == 0 || static_cast<std::size_t>(x.dim(0)) != taus.size()) {
    throw dc::ShapeError(std::string(op) + ": " + std::to_string(taus.size()) + " steps for input of shape " +
                         dc::to_string(x.shape()));
  }
  std::vector<double> c(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    schedule.check_step(taus[i], op);
    c[i] = f(schedule, taus[i]);
  }
  dc::Shape shape(x.rank(), 1);
  shape[0] = static_cast<std::int64_t>(taus.size());
  return Tensor::from_vector(shape, std::move(c));
}

double sqrt_ab(const NoiseSchedule& s, int t) { return std::sqrt(s.alpha_bar[t]); }
double sqrt_one_minus_ab(const NoiseSchedule& s, int t) { return std::sqrt(1.0 - s.alpha_bar[t]); }

}  // namespace

Tensor forward_sample(const Tensor& a0, int tau, const Tensor& noise, const NoiseSchedule& schedule) {
  schedule.check_step(tau, "forward_sample");
  return a0 * std::sqrt(schedule.alpha_bar[tau]) + noise * std::sqrt(1.0 - schedule.alpha_bar[tau]);
}

Tensor forward_sample(const Tensor& a0, std::span<const int> taus, const Tensor& noise, const NoiseSchedule& schedule) {
  return a0 * row_coefficients(a0, taus, schedule, "forward_sample", sqrt_ab) +
         noise * row_coefficients(a0, taus, schedule, "forward_sample", sqrt_one_minus_ab);
}

Tensor predict_x0(const Tensor& a_tau, int tau, const Tensor& eps_hat, const NoiseSchedule& schedule) {
  schedule.check_step(tau, "predict_x0");
  return (a_tau - eps_hat * std::sqrt(1.0 - schedule.alpha_bar[tau])) * (1.0 / std::sqrt(schedule.alpha_bar[tau]));
}

Tensor predict_x0(const Tensor& a_tau, std::span<const int> taus, const Tensor& eps_hat,
                  const NoiseSchedule& schedule) {
  return (a_tau - eps_hat * row_coefficients(a_tau, taus, schedule, "predict_x0", sqrt_one_minus_ab)) /
         row_coefficients(a_tau, taus, schedule, "predict_x0", sqrt_ab);
}

Tensor posterior_mean(const Tensor& a_tau, int tau, const Tensor& eps_hat, const NoiseSchedule& schedule) {
  schedule.check_step(tau, "posterior_mean");
  const double coef = schedule.beta[tau] / std::sqrt(1.0 - schedule.alpha_bar[tau]);
  return (a_tau - eps_hat * coef) * (1.0 / std::sqrt(schedule.alpha[tau]));
}

Tensor standard_normal(const dc::Shape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(static_cast<std::size_t>(dc::numel(shape)));
  for (auto& x : v) x = normal(rng);
  return Tensor::from_vector(shape, std::move(v));
}

Tensor ddpm_step(const Tensor& a_tau, int tau, const Tensor& eps_hat, const NoiseSchedule& schedule,
                 std::mt19937_64& rng) {
  Tensor mean = posterior_mean(a_tau, tau, eps_hat, schedule);
  if (tau == 1) return mean;
  return mean + standard_normal(a_tau.shape(), rng) * std::sqrt(schedule.beta[tau]);
}

Tensor ddim_step(const Tensor& a_tau, int from, int to, const Tensor& eps_hat, const NoiseSchedule& schedule) {
  schedule.check_step(from, "ddim_step", 0);
  schedule.check_step(to, "ddim_step", 0);
  if (to > from) throw std::invalid_argument("ddim_step: target step above source step");
  if (to == from) return a_tau;
  Tensor x0 = predict_x0(a_tau, from, eps_hat, schedule);
  return x0 * std::sqrt(schedule.alpha_bar[to]) + eps_hat * std::sqrt(1.0 - schedule.alpha_bar[to]);
}

Tensor sample_step(const Tensor& a_tau, int tau, const Tensor& eps_hat, const NoiseSchedule& schedule,
                   Sampler sampler, std::mt19937_64& rng, int target) {
  schedule.check_step(tau, "sample_step");
  if (sampler == Sampler::ddpm) return ddpm_step(a_tau, tau, eps_hat, schedule, rng);
  return ddim_step(a_tau, tau, target < 0 ? tau - 1 : target, eps_hat, schedule);
}

std::vector<int> ddim_timesteps(int total_steps, int count) {
  if (count < 1 || count > total_steps) {
    throw std::invalid_argument("ddim_timesteps: " + std::to_string(count) + " steps requested for a chain of " +
                                std::to_string(total_steps));
  }
  if (count == 1) return {total_steps};
  std::vector<int> out;
  for (int i = 0; i < count; ++i) {
    const double pos = total_steps - static_cast<double>(i) * (total_steps - 1) / (count - 1);
    out.push_back(static_cast<int>(std::lround(pos)));
  }
  return out;
}

}  // namespace adm::diff
