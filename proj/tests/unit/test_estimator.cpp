// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "../support/gradcheck.hpp"
#include "adm/estimator/estimator.hpp"

using namespace adm;
using Catch::Approx;
using dc::Tensor;

namespace {

struct Fixture {
  dc::ParamStore store;
  dc::Rng rng{11};
  est::EstimatorConfig cfg;
  est::MotionPatternEstimator estimator{store, "estimator", cfg, rng};
  est::ModeHeadPredictor heads{store, "heads", cfg, rng};
  std::mt19937_64 data{5};
  Tensor d_local = testing::random_tensor({4, 128}, data, -1, 1, false);
  Tensor d_global = testing::random_tensor({4, 128}, data, -1, 1, false);
};

void zero_param(dc::ParamStore& store, const std::string& name) {
  for (auto& v : store.at(name).mutable_values()) v = 0.0;
}

}  // namespace

TEST_CASE("estimator output shapes and ranges") {
  Fixture f;
  const auto p = f.estimator(f.d_local, f.d_global);
  CHECK(p.mean.shape() == dc::Shape{4, 30, 2});
  CHECK(p.variance.shape() == dc::Shape{4, 1});
  CHECK(p.nodes.shape() == dc::Shape{4, 30, 2, 6});
  for (double v : p.variance.values()) CHECK(v > 0.0);
  const auto prior = est::reparameterize(p);
  CHECK(prior.shape() == dc::Shape{4, 30, 2, 6});
  for (double v : prior.values()) CHECK(std::isfinite(v));

  // The separate entry points agree with the fused pass.
  const auto mean = f.estimator.estimate_mean(f.d_local, f.d_global);
  const auto var = f.estimator.estimate_variance(f.d_local, f.d_global);
  const auto nodes = f.estimator.estimate_nodes(f.d_local, f.d_global, var);
  CHECK(std::equal(mean.values().begin(), mean.values().end(), p.mean.values().begin()));
  CHECK(std::equal(var.values().begin(), var.values().end(), p.variance.values().begin()));
  CHECK(std::equal(nodes.values().begin(), nodes.values().end(), p.nodes.values().begin()));
  CHECK_THROWS_AS(f.estimator.estimate_nodes(f.d_local, f.d_global, Tensor::zeros({4, 2})), dc::ShapeError);
}

TEST_CASE("estimator is deterministic") {
  Fixture f;
  const auto a = f.estimator.prior(f.d_local, f.d_global);
  const auto b = f.estimator.prior(f.d_local, f.d_global);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}

TEST_CASE("zero final mean layer gives a zero mean trajectory") {
  Fixture f;
  zero_param(f.store, "estimator.mean_dec.1.weight");
  zero_param(f.store, "estimator.mean_dec.1.bias");
  const auto mean = f.estimator.estimate_mean(f.d_local, f.d_global);
  for (double v : mean.values()) CHECK(v == 0.0);
}

TEST_CASE("zero variance pre-activation gives log 2") {
  Fixture f;
  zero_param(f.store, "estimator.var_out.weight");
  zero_param(f.store, "estimator.var_out.bias");
  const auto variance = f.estimator.estimate_variance(f.d_local, f.d_global);
  for (double v : variance.values()) {
    CHECK(v == Approx(std::log(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("reparameterization") {
  SECTION("brute-force broadcast loop") {
    std::mt19937_64 r(3);
    est::MotionPattern p{testing::random_tensor({3, 30, 2}, r), testing::random_tensor({3, 1}, r, 0.1, 2.0),
                         testing::random_tensor({3, 30, 2, 5}, r)};
    const auto prior = est::reparameterize(p);
    for (std::int64_t n = 0; n < 3; ++n)
      for (std::int64_t t = 0; t < 30; ++t)
        for (std::int64_t d = 0; d < 2; ++d)
          for (std::int64_t k = 0; k < 5; ++k)
            CHECK(prior.at({n, t, d, k}) ==
                  Approx(p.mean.at({n, t, d}) + p.variance.at({n, 0}) * p.nodes.at({n, t, d, k})).margin(1e-14));
  }
  SECTION("hand values") {
    est::MotionPattern p{Tensor::from_vector({1, 1, 2}, {1, 1}), Tensor::from_vector({1, 1}, {2}),
                         Tensor::from_vector({1, 1, 2, 1}, {0.5, -0.5})};
    const auto prior = est::reparameterize(p);
    CHECK(prior.at({0, 0, 0, 0}) == 2.0);
    CHECK(prior.at({0, 0, 1, 0}) == 0.0);
  }
  SECTION("zero variance collapses every mode onto the mean") {
    std::mt19937_64 r(4);
    est::MotionPattern p{testing::random_tensor({2, 30, 2}, r), Tensor::zeros({2, 1}),
                         testing::random_tensor({2, 30, 2, 6}, r)};
    const auto prior = est::reparameterize(p);
    for (std::int64_t k = 0; k < 6; ++k) CHECK(prior.at({1, 7, 1, k}) == p.mean.at({1, 7, 1}));
  }
  SECTION("zero mean and unit variance returns the nodes") {
    std::mt19937_64 r(5);
    est::MotionPattern p{Tensor::zeros({2, 30, 2}), Tensor::full({2, 1}, 1.0), testing::random_tensor({2, 30, 2, 6}, r)};
    const auto prior = est::reparameterize(p);
    CHECK(std::equal(prior.values().begin(), prior.values().end(), p.nodes.values().begin()));
  }
  SECTION("shape mismatch") {
    est::MotionPattern p{Tensor::zeros({2, 30, 2}), Tensor::zeros({3, 1}), Tensor::zeros({2, 30, 2, 6})};
    CHECK_THROWS_AS(est::reparameterize(p), dc::ShapeError);
  }
}

TEST_CASE("reparameterization gradients match finite differences") {
  std::mt19937_64 r(8);
  auto res = testing::grad_check(
      [](const std::vector<Tensor>& in) {
        return testing::probe_loss(est::reparameterize({in[0], in[1], in[2]}));
      },
      {testing::random_tensor({2, 30, 2}, r), testing::random_tensor({2, 1}, r, 0.2, 1.0),
       testing::random_tensor({2, 30, 2, 3}, r)});
  CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("node loss reaches the variance parameters") {
  Fixture f;
  const auto p = f.estimator(f.d_local, f.d_global);
  f.store.zero_grad();
  testing::probe_loss(p.nodes).backward();
  double g = 0.0;
  for (double v : f.store.at("estimator.var_out.weight").grad()) g += std::abs(v);
  CHECK(g > 0.0);
}

TEST_CASE("mode heads") {
  Fixture f;
  const auto h = f.heads(f.d_local, f.d_global);
  CHECK(h.logits.shape() == dc::Shape{4, 6});
  CHECK(h.laplace_scale.shape() == dc::Shape{4, 30, 2});
  for (std::int64_t n = 0; n < 4; ++n) {
    double s = 0.0;
    for (std::int64_t k = 0; k < 6; ++k) s += h.probabilities.at({n, k});
    CHECK(s == Approx(1.0).margin(1e-9));
  }
  for (double v : h.laplace_scale.values()) CHECK(v > 0.0);

  SECTION("equal logits give uniform probabilities") {
    zero_param(f.store, "heads.probability.1.weight");
    zero_param(f.store, "heads.probability.1.bias");
    const auto u = f.heads(f.d_local, f.d_global);
    for (double v : u.probabilities.values()) CHECK(v == Approx(1.0 / 6.0).epsilon(1e-12));
  }
  SECTION("argmax is invariant to a shared logit shift") {
    for (double shift : {-50.0, 3.0, 1e3}) {
      const auto shifted = dc::softmax(h.logits + shift);
      for (std::int64_t n = 0; n < 4; ++n) {
        std::int64_t a = 0, b = 0;
        for (std::int64_t k = 1; k < 6; ++k) {
          if (h.probabilities.at({n, k}) > h.probabilities.at({n, a})) a = k;
          if (shifted.at({n, k}) > shifted.at({n, b})) b = k;
        }
        CHECK(a == b);
      }
    }
  }
}

TEST_CASE("parameter budgets from introspection") {
  Fixture f;
  const auto estimator_count = f.store.scalar_count("estimator.");
  INFO(estimator_count);
  CHECK(estimator_count > 1'400'000);
  CHECK(estimator_count < 1'800'000);

  dc::ParamStore mlp_store;
  dc::Rng rng(1);
  est::MlpPrior mlp(mlp_store, "mlp_prior", f.cfg, rng);
  const auto mlp_count = mlp_store.scalar_count();
  INFO(mlp_count);
  CHECK(mlp_count > 200'000);
  CHECK(mlp_count < 260'000);
  CHECK(mlp(f.d_local, f.d_global).shape() == dc::Shape{4, 30, 2, 6});
}

TEST_CASE("estimator handles other mode counts") {
  dc::ParamStore store;
  dc::Rng rng(2);
  est::EstimatorConfig cfg;
  cfg.modes = 20;
  cfg.node_hidden = 64;
  est::MotionPatternEstimator e(store, "e", cfg, rng);
  std::mt19937_64 r(1);
  const auto prior = e.prior(testing::random_tensor({2, 128}, r), testing::random_tensor({2, 128}, r));
  CHECK(prior.shape() == dc::Shape{2, 30, 2, 20});
  CHECK_THROWS_AS(est::estimator_config_from_json({{"modes", 0}}), std::invalid_argument);
}
