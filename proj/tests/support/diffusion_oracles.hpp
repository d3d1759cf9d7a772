// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo and closed-form checks of the diffusion equations, shared by
// the unit suite and the acceptance gate.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "adm/diffusion/schedule.hpp"

namespace adm::testing {

struct MarginalStats {
  double mean = 0.0;      // mean of (A_tau - sqrt(alpha_bar) A_0)
  double variance = 0.0;  // variance of the same residual
  double expected_variance = 0.0;
};

// Draws `samples` scalars of A_tau for a bounded random A_0 and measures the
// residual against the Gaussian marginal.
inline MarginalStats forward_marginal(const diff::NoiseSchedule& schedule, int tau, int samples,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> data(-2.0, 2.0);
  std::vector<double> a0(static_cast<std::size_t>(samples));
  for (auto& v : a0) v = data(rng);
  const auto x0 = dc::Tensor::from_vector({samples}, a0);
  const auto noise = diff::standard_normal({samples}, rng);
  const auto xt = diff::forward_sample(x0, tau, noise, schedule);
  const double scale = std::sqrt(schedule.alpha_bar[tau]);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double r = xt.values()[i] - scale * a0[i];
    sum += r;
    sum_sq += r * r;
  }
  MarginalStats st;
  st.mean = sum / samples;
  st.variance = sum_sq / samples - st.mean * st.mean;
  st.expected_variance = 1.0 - schedule.alpha_bar[tau];
  return st;
}

// Closed-form noise for a point-mass data distribution at `a0`.
inline dc::Tensor oracle_eps(const dc::Tensor& a_tau, int tau, const dc::Tensor& a0,
                             const diff::NoiseSchedule& schedule) {
  return (a_tau - a0 * std::sqrt(schedule.alpha_bar[tau])) * (1.0 / std::sqrt(1.0 - schedule.alpha_bar[tau]));
}

// Full ancestral chain T..1 from pure noise with the oracle noise.
// `inject_noise = false` iterates posterior means only.
inline double oracle_ddpm_error(const diff::NoiseSchedule& schedule, const dc::Tensor& a0, std::uint64_t seed,
                                bool inject_noise = true) {
  std::mt19937_64 rng(seed);
  dc::Tensor x = diff::standard_normal(a0.shape(), rng);
  for (int tau = schedule.steps; tau >= 1; --tau) {
    const auto eps = oracle_eps(x, tau, a0, schedule);
    x = inject_noise ? diff::ddpm_step(x, tau, eps, schedule, rng) : diff::posterior_mean(x, tau, eps, schedule);
  }
  double worst = 0.0;
  for (std::int64_t i = 0; i < a0.numel(); ++i) worst = std::max(worst, std::abs(x.values()[i] - a0.values()[i]));
  return worst;
}

inline double oracle_ddim_error(const diff::NoiseSchedule& schedule, const dc::Tensor& a0, int steps,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  dc::Tensor x = diff::standard_normal(a0.shape(), rng);
  const auto visit = diff::ddim_timesteps(schedule.steps, steps);
  for (std::size_t i = 0; i < visit.size(); ++i) {
    const int to = i + 1 < visit.size() ? visit[i + 1] : 0;
    x = diff::ddim_step(x, visit[i], to, oracle_eps(x, visit[i], a0, schedule), schedule);
  }
  double worst = 0.0;
  for (std::int64_t i = 0; i < a0.numel(); ++i) worst = std::max(worst, std::abs(x.values()[i] - a0.values()[i]));
  return worst;
}

}  // namespace adm::testing
