// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/trainer/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adm::train {

using dc::Tensor;

BestMode select_best(const Tensor& predictions, const Tensor& ground_truth) {
  if (predictions.rank() != 4 || ground_truth.rank() != 3 || predictions.dim(0) != ground_truth.dim(0) ||
      predictions.dim(1) != ground_truth.dim(1) || predictions.dim(2) != 2 || ground_truth.dim(2) != 2) {
    throw dc::ShapeError("select_best: predictions " + dc::to_string(predictions.shape()) + " vs ground truth " +
                         dc::to_string(ground_truth.shape()));
  }
  const auto n = predictions.dim(0);
  const auto steps = predictions.dim(1);
  const auto modes = predictions.dim(3);
  if (modes < 1) throw dc::ShapeError("select_best: no modes");
  const auto p = predictions.values();
  const auto g = ground_truth.values();
  BestMode out;
  out.errors.assign(static_cast<std::size_t>(n * modes), 0.0);
  out.index.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> rows(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t k = 0; k < modes; ++k) {
      double sum = 0.0;
      for (std::int64_t t = 0; t < steps; ++t) {
        const auto base = ((i * steps + t) * 2) * modes + k;
        const double dx = p[static_cast<std::size_t>(base)] - g[static_cast<std::size_t>((i * steps + t) * 2)];
        const double dy = p[static_cast<std::size_t>(base + modes)] - g[static_cast<std::size_t>((i * steps + t) * 2 + 1)];
        sum += std::hypot(dx, dy);
      }
      out.errors[static_cast<std::size_t>(i * modes + k)] = sum / static_cast<double>(steps);
    }
    const auto first = out.errors.begin() + i * modes;
    out.index[static_cast<std::size_t>(i)] = std::min_element(first, first + modes) - first;
    rows[static_cast<std::size_t>(i)] = i * modes + out.index[static_cast<std::size_t>(i)];
  }
  const Tensor by_mode = dc::reshape(dc::permute(predictions, {0, 3, 1, 2}), {n * modes, steps * 2});
  out.best = dc::reshape(dc::index_select(by_mode, 0, rows), {n, steps, 2});
  return out;
}

Tensor nll_laplace(const Tensor& ground_truth, const Tensor& best, const Tensor& scale) {
  if (ground_truth.shape() != best.shape() || best.shape() != scale.shape()) {
    throw dc::ShapeError("nll_laplace: shapes " + dc::to_string(ground_truth.shape()) + ", " +
                         dc::to_string(best.shape()) + ", " + dc::to_string(scale.shape()));
  }
  for (double b : scale.values()) {
    if (!(b > 0.0)) throw std::domain_error("nll_laplace: Laplace scale must be positive, got " + std::to_string(b));
  }
  return dc::mean(dc::abs(ground_truth - best) / scale + dc::log(scale * 2.0));
}

Tensor soft_target_ce(const std::vector<double>& errors, const Tensor& logits, double temperature) {
  if (logits.rank() != 2 || static_cast<std::int64_t>(errors.size()) != logits.numel()) {
    throw dc::ShapeError("soft_target_ce: " + std::to_string(errors.size()) + " errors for logits " +
                         dc::to_string(logits.shape()));
  }
  if (!(temperature > 0.0)) throw std::invalid_argument("soft_target_ce: temperature must be positive");
  std::vector<double> scaled(errors.size());
  std::transform(errors.begin(), errors.end(), scaled.begin(), [&](double e) { return -e / temperature; });
  const Tensor targets = dc::softmax(Tensor::from_vector(logits.shape(), std::move(scaled)));
  return -(dc::sum(targets * dc::log_softmax(logits)) / static_cast<double>(logits.dim(0)));
}

}  // namespace adm::train
