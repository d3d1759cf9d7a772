// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Variance schedule, forward corruption and the DDPM / DDIM reverse steps.
// Step index tau runs over 0..T with tau = 0 the clean data.

#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "adm/diffcore/ops.hpp"

namespace adm::diff {

struct NoiseSchedule {
  int steps = 0;                  // T
  std::vector<double> beta;       // [T + 1], beta[0] = 0
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // running product, alpha_bar[0] = 1

  void check_step(int tau, const char* op, int lowest = 1) const;
};

// Linear beta ramp. The endpoints are quoted for T = 1000; a shorter chain
// scales both by 1000 / T so that alpha_bar[T] stays small.
NoiseSchedule make_schedule(int steps, double beta_start = 1e-4, double beta_end = 0.02);

enum class Sampler { ddpm, ddim };
Sampler parse_sampler(const std::string& name);
const char* to_string(Sampler s);

// sqrt(alpha_bar) * a0 + sqrt(1 - alpha_bar) * noise. With one tau per
// leading row, `taus.size()` must equal a0.dim(0).
dc::Tensor forward_sample(const dc::Tensor& a0, int tau, const dc::Tensor& noise, const NoiseSchedule& schedule);
dc::Tensor forward_sample(const dc::Tensor& a0, std::span<const int> taus, const dc::Tensor& noise,
                          const NoiseSchedule& schedule);

// One-step estimate of A_0 from A_tau and the predicted noise.
dc::Tensor predict_x0(const dc::Tensor& a_tau, int tau, const dc::Tensor& eps_hat, const NoiseSchedule& schedule);
dc::Tensor predict_x0(const dc::Tensor& a_tau, std::span<const int> taus, const dc::Tensor& eps_hat,
                      const NoiseSchedule& schedule);

// 1/sqrt(alpha) * (A_tau - beta / sqrt(1 - alpha_bar) * eps_hat).
dc::Tensor posterior_mean(const dc::Tensor& a_tau, int tau, const dc::Tensor& eps_hat, const NoiseSchedule& schedule);

// Standard-normal tensor drawn from `rng` in row-major order.
dc::Tensor standard_normal(const dc::Shape& shape, std::mt19937_64& rng);

// Ancestral step tau -> tau - 1: posterior mean plus sqrt(beta) noise, with
// no noise at tau = 1.
dc::Tensor ddpm_step(const dc::Tensor& a_tau, int tau, const dc::Tensor& eps_hat, const NoiseSchedule& schedule,
                     std::mt19937_64& rng);

// Deterministic (eta = 0) jump from step `from` to step `to` < = from.
dc::Tensor ddim_step(const dc::Tensor& a_tau, int from, int to, const dc::Tensor& eps_hat,
                     const NoiseSchedule& schedule);

// Dispatches on the sampler. DDIM jumps to `target` (defaults to tau - 1);
// DDPM always moves one step.
dc::Tensor sample_step(const dc::Tensor& a_tau, int tau, const dc::Tensor& eps_hat, const NoiseSchedule& schedule,
                       Sampler sampler, std::mt19937_64& rng, int target = -1);

// Descending DDIM visit order: `count` steps evenly spaced over [1, T],
// always including T and 1 (a single step visits T only).
std::vector<int> ddim_timesteps(int total_steps, int count);

}  // namespace adm::diff
