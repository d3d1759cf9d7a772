// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable primitives. Every op validates shapes, rejects non-finite
// inputs (see set_finite_checks) and registers its backward rule when graph
// recording is on.

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "adm/diffcore/tensor.hpp"

namespace adm::dc {

// Elementwise binary ops with numpy-style broadcasting.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor add_scalar(const Tensor& x, double c);
Tensor mul_scalar(const Tensor& x, double c);
Tensor neg(const Tensor& x);

Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor square(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor softplus(const Tensor& x);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator+(const Tensor& a, double c) { return add_scalar(a, c); }
inline Tensor operator-(const Tensor& a, double c) { return add_scalar(a, -c); }
inline Tensor operator*(const Tensor& a, double c) { return mul_scalar(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return mul_scalar(a, c); }
inline Tensor operator/(const Tensor& a, double c) { return mul_scalar(a, 1.0 / c); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

// Reductions. Negative axes count from the back.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum(const Tensor& x, int axis, bool keepdim = false);
Tensor mean(const Tensor& x, int axis, bool keepdim = false);

// Along the last axis.
Tensor softmax(const Tensor& x);
Tensor log_softmax(const Tensor& x);

// Normalizes over the last axis then applies gamma/beta. Zero-variance rows
// map to beta since eps sits inside the square root.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

// Shape manipulation.
Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<int>& perm);
Tensor transpose(const Tensor& x, int axis_a, int axis_b);
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& x, int axis, std::int64_t begin, std::int64_t end);
Tensor index_select(const Tensor& x, int axis, const std::vector<std::int64_t>& index);

// x[..., k] @ w[k, n] -> [..., n].
Tensor matmul(const Tensor& x, const Tensor& w);
// matmul plus a broadcast bias of shape [n]; bias may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);

/// Allowed-key mask for attention, shape [B, Lq, Lk] or [B, 1, Lk].
struct AttentionMask {
  Shape shape;
  std::vector<std::uint8_t> allowed;

  bool is_allowed(std::int64_t b, std::int64_t i, std::int64_t j) const {
    const std::int64_t lq = shape[1];
    const std::int64_t lk = shape[2];
    const std::int64_t row = lq == 1 ? 0 : i;
    return allowed[static_cast<std::size_t>((b * lq + row) * lk + j)] != 0;
  }
};

// Scaled dot-product attention over `heads` equal slices of the feature axis.
// q: [B, Lq, D]; k, v: [B, Lk, D]. A query row whose keys are all masked
// returns the matching row of `fallback` ([B, Lq, D]); without a fallback
// such rows are zero.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads,
                 const std::shared_ptr<const AttentionMask>& mask = nullptr, const Tensor& fallback = Tensor());

// One GRU step with reset/update/candidate gating (gate order r, z, n).
// x: [B, I]; h: [B, H]; w_ih: [I, 3H]; w_hh: [H, 3H]; b_ih, b_hh: [3H].
Tensor gru_cell(const Tensor& x, const Tensor& h, const Tensor& w_ih, const Tensor& w_hh, const Tensor& b_ih,
                const Tensor& b_hh);

}  // namespace adm::dc
