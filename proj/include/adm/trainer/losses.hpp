// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Winner-take-all selection, Laplace negative log-likelihood and the
// soft-target mode classification loss.

#pragma once

#include <vector>

#include "adm/diffcore/ops.hpp"

namespace adm::train {

struct BestMode {
  std::vector<std::int64_t> index;  // per row, lowest index on ties
  std::vector<double> errors;       // [N * K] mean Euclidean error per mode
  dc::Tensor best;                  // [N, T, 2], differentiable gather
};

// predictions [N, T, 2, K], ground_truth [N, T, 2].
BestMode select_best(const dc::Tensor& predictions, const dc::Tensor& ground_truth);

// Mean over every element of |gt - best| / b + log(2 b). Throws
// std::domain_error if any b <= 0.
dc::Tensor nll_laplace(const dc::Tensor& ground_truth, const dc::Tensor& best, const dc::Tensor& scale);

// Soft targets softmax(-errors / temperature) per row; returns
// -(1/N) sum_i sum_k target_ik log softmax(logits)_ik.
dc::Tensor soft_target_ce(const std::vector<double>& errors, const dc::Tensor& logits, double temperature = 1.0);

}  // namespace adm::train
