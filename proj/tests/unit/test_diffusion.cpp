// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "../support/diffusion_oracles.hpp"
#include "../support/gradcheck.hpp"
#include "adm/diffusion/denoiser.hpp"
#include "adm/diffusion/schedule.hpp"

using namespace adm;
using Catch::Approx;
using dc::Tensor;

TEST_CASE("linear schedule tables") {
  const auto s = diff::make_schedule(1000);
  CHECK(s.alpha_bar[0] == 1.0);
  CHECK(s.beta[1] == Approx(1e-4).epsilon(1e-12));
  CHECK(s.beta[1000] == Approx(0.02).epsilon(1e-12));
  // Independent product: log(alpha_bar_T) = sum log(1 - beta_t).
  double log_ab = 0.0;
  for (int t = 1; t <= 1000; ++t) log_ab += std::log1p(-(1e-4 + (0.02 - 1e-4) * (t - 1) / 999.0));
  CHECK(s.alpha_bar[1000] == Approx(std::exp(log_ab)).epsilon(1e-9));
  CHECK(s.alpha_bar[1000] == Approx(4.0e-5).epsilon(0.02));
  CHECK(s.alpha_bar[1000] < 1e-3);
  for (int t = 1; t <= 1000; ++t) {
    CHECK(s.beta[t] > 0.0);
    CHECK(s.beta[t] < 1.0);
    CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
  }
  CHECK_THROWS_AS(diff::make_schedule(0), std::invalid_argument);
}

TEST_CASE("shortened schedules stay monotone and end near pure noise") {
  for (int steps : {50, 100, 250}) {
    const auto s = diff::make_schedule(steps);
    CHECK(s.alpha_bar[steps] < 1e-3);
    for (int t = 1; t <= steps; ++t) CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
  }
}

TEST_CASE("forward sample") {
  const auto s = diff::make_schedule(1000);
  const auto a0 = Tensor::from_vector({2, 2}, {1.0, -2.0, 0.5, 3.0});
  SECTION("zero noise scales the data") {
    const auto x = diff::forward_sample(a0, 300, Tensor::zeros({2, 2}), s);
    for (int i = 0; i < 4; ++i) CHECK(x.values()[i] == a0.values()[i] * std::sqrt(s.alpha_bar[300]));
  }
  SECTION("out of range step") {
    CHECK_THROWS_AS(diff::forward_sample(a0, 0, Tensor::zeros({2, 2}), s), std::out_of_range);
    CHECK_THROWS_AS(diff::forward_sample(a0, 1001, Tensor::zeros({2, 2}), s), std::out_of_range);
  }
  SECTION("per-row steps match scalar calls") {
    std::mt19937_64 rng(1);
    const auto noise = diff::standard_normal({2, 2}, rng);
    const std::vector<int> taus{10, 700};
    const auto rows = diff::forward_sample(a0, taus, noise, s);
    const auto r0 = diff::forward_sample(a0, 10, noise, s);
    const auto r1 = diff::forward_sample(a0, 700, noise, s);
    CHECK(rows.at({0, 1}) == Approx(r0.at({0, 1})).epsilon(1e-15));
    CHECK(rows.at({1, 0}) == Approx(r1.at({1, 0})).epsilon(1e-15));
  }
}

TEST_CASE("forward marginals match the closed form") {
  const auto s = diff::make_schedule(1000);
  for (int tau : {1, 500, 1000}) {
    const auto st = testing::forward_marginal(s, tau, 100000, 17 + tau);
    INFO("tau " << tau << " mean " << st.mean << " var " << st.variance << " expected " << st.expected_variance);
    CHECK(std::abs(st.mean) < 0.02);
    CHECK(std::abs(st.variance / st.expected_variance - 1.0) < 0.05);
  }
}

TEST_CASE("posterior mean") {
  const auto s = diff::make_schedule(1000);
  SECTION("zero noise estimate divides by sqrt(alpha)") {
    const auto a = Tensor::from_vector({3}, {1.0, -0.5, 2.0});
    const auto mu = diff::posterior_mean(a, 400, Tensor::zeros({3}), s);
    for (int i = 0; i < 3; ++i) CHECK(mu.values()[i] == Approx(a.values()[i] / std::sqrt(s.alpha[400])).epsilon(1e-15));
  }
  SECTION("hand evaluation at the first step") {
    // beta_1 = 1e-4, alpha_1 = alpha_bar_1 = 0.9999, sqrt(1 - alpha_bar_1) = 0.01.
    const auto mu = diff::posterior_mean(Tensor::scalar(0.5), 1, Tensor::scalar(0.3), s);
    CHECK(mu.item() == Approx((0.5 - 0.01 * 0.3) / std::sqrt(0.9999)).epsilon(1e-12));
  }
  SECTION("iterated means with the oracle noise recover the data") {
    const auto a0 = Tensor::from_vector({2, 3}, {0.3, -1.2, 2.0, 0.0, 0.7, -0.4});
    CHECK(testing::oracle_ddpm_error(s, a0, 3, false) < 1e-3);
  }
}

TEST_CASE("reverse samplers") {
  const auto s = diff::make_schedule(1000);
  const auto a0 = Tensor::from_vector({4}, {1.5, -0.7, 0.2, 2.4});
  SECTION("ddim with a zero-length jump is the identity") {
    const auto x = Tensor::from_vector({4}, {0.1, 0.2, 0.3, 0.4});
    const auto y = diff::ddim_step(x, 250, 250, Tensor::from_vector({4}, {9, 9, 9, 9}), s);
    for (int i = 0; i < 4; ++i) CHECK(y.values()[i] == x.values()[i]);
  }
  SECTION("ddpm at the first step injects no noise") {
    std::mt19937_64 r1(1), r2(2);
    const auto x = Tensor::from_vector({4}, {0.1, 0.2, 0.3, 0.4});
    const auto e = Tensor::from_vector({4}, {0.5, -0.5, 0.1, 0.0});
    const auto y1 = diff::ddpm_step(x, 1, e, s, r1);
    const auto y2 = diff::ddpm_step(x, 1, e, s, r2);
    for (int i = 0; i < 4; ++i) CHECK(y1.values()[i] == y2.values()[i]);
  }
  SECTION("oracle noise: full ddpm within 1e-3, 50-step ddim within 1e-2") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CHECK(testing::oracle_ddpm_error(s, a0, seed) < 1e-3);
      CHECK(testing::oracle_ddim_error(s, a0, 50, seed) < 1e-2);
    }
  }
  SECTION("unknown sampler name") { CHECK_THROWS_AS(diff::parse_sampler("euler"), std::invalid_argument); }
}

TEST_CASE("ddim visit order") {
  for (int count : {1, 2, 5, 20, 50, 1000}) {
    const auto v = diff::ddim_timesteps(1000, count);
    REQUIRE(static_cast<int>(v.size()) == count);
    CHECK(v.front() == 1000);
    if (count > 1) CHECK(v.back() == 1);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] < v[i - 1]);
  }
  CHECK_THROWS_AS(diff::ddim_timesteps(10, 11), std::invalid_argument);
}

TEST_CASE("denoiser contract") {
  dc::ParamStore store;
  dc::Rng rng(4);
  diff::DenoiserConfig cfg;
  diff::Denoiser net(store, "denoiser", cfg, rng);
  std::mt19937_64 data(9);
  const auto a = diff::standard_normal({3, 30, 2, 6}, data);
  const auto cond = diff::standard_normal({3, 128}, data);
  const std::vector<int> taus{1, 500, 1000};

  const auto e1 = net(a, taus, cond);
  CHECK(e1.shape() == a.shape());
  const auto e2 = net(a, taus, cond);
  CHECK(std::equal(e1.values().begin(), e1.values().end(), e2.values().begin()));
  for (double v : e1.values()) CHECK(std::isfinite(v));
  CHECK(net.invocations() == 2);
  net.reset_invocations();
  CHECK(net.invocations() == 0);

  SECTION("modes are processed independently") {
    // Swap modes 0 and 4 of the input; the output swaps accordingly.
    auto swapped = dc::concat({dc::slice(a, 3, 4, 5), dc::slice(a, 3, 1, 4), dc::slice(a, 3, 0, 1),
                               dc::slice(a, 3, 5, 6)},
                              3);
    const auto e3 = net(swapped, taus, cond);
    for (std::int64_t n = 0; n < 3; ++n) {
      for (std::int64_t t = 0; t < 30; ++t) {
        for (std::int64_t d = 0; d < 2; ++d) {
          CHECK(e3.at({n, t, d, 0}) == Approx(e1.at({n, t, d, 4})).epsilon(1e-12));
          CHECK(e3.at({n, t, d, 4}) == Approx(e1.at({n, t, d, 0})).epsilon(1e-12));
        }
      }
    }
  }
  SECTION("agent rows are processed independently") {
    const auto e_one = net(dc::slice(a, 0, 1, 2), std::vector<int>{500}, dc::slice(cond, 0, 1, 2));
    for (std::int64_t t = 0; t < 30; ++t) CHECK(e_one.at({0, t, 1, 3}) == Approx(e1.at({1, t, 1, 3})).epsilon(1e-12));
  }
  SECTION("wrong trajectory shape") {
    CHECK_THROWS_AS(net(diff::standard_normal({3, 29, 2, 6}, data), taus, cond), dc::ShapeError);
  }
}

TEST_CASE("small denoiser gradients match finite differences") {
  dc::ParamStore store;
  dc::Rng rng(6);
  diff::DenoiserConfig cfg{8, 2, 1, 16, 30, 4};
  diff::Denoiser net(store, "d", cfg, rng);
  std::mt19937_64 data(3);
  auto a = testing::random_tensor({2, 30, 2, 2}, data);
  auto cond = testing::random_tensor({2, 4}, data);
  const std::vector<int> taus{3, 900};
  auto res = testing::grad_check([&](const std::vector<Tensor>& in) { return testing::probe_loss(net(in[0], taus, in[1])); },
                                 {a, cond});
  INFO(res.worst);
  CHECK(res.max_rel_error < 1e-4);
}
