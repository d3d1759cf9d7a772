// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "adm/diffcore/ops.hpp"

namespace adm::dc {

using detail::make_result;
using detail::require_finite;

namespace {

struct Broadcast {
  Shape out;
  std::vector<std::int64_t> stride_a;
  std::vector<std::int64_t> stride_b;
};

std::vector<std::int64_t> aligned_strides(const Shape& in, std::size_t rank) {
  std::vector<std::int64_t> strides(rank, 0);
  std::int64_t s = 1;
  const std::size_t offset = rank - in.size();
  for (std::size_t i = in.size(); i-- > 0;) {
    strides[offset + i] = in[i] == 1 ? 0 : s;
    s *= in[i];
  }
  return strides;
}

Broadcast broadcast_shapes(const Shape& a, const Shape& b, const char* op) {
  const std::size_t rank = std::max(a.size(), b.size());
  Broadcast bc;
  bc.out.assign(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::int64_t da = i + a.size() >= rank ? a[i + a.size() - rank] : 1;
    const std::int64_t db = i + b.size() >= rank ? b[i + b.size() - rank] : 1;
    if (da != db && da != 1 && db != 1) {
      throw ShapeError(std::string(op) + ": cannot broadcast " + to_string(a) + " with " + to_string(b));
    }
    bc.out[i] = std::max(da, db);
    if (da == 0 || db == 0) {
      bc.out[i] = 0;
    }
  }
  bc.stride_a = aligned_strides(a, rank);
  bc.stride_b = aligned_strides(b, rank);
  return bc;
}

// Calls fn(out_index, a_index, b_index) for every output element.
template <class Fn>
void for_each_broadcast(const Broadcast& bc, std::size_t na, std::size_t nb, Fn&& fn) {
  const std::int64_t total = numel(bc.out);
  if (total == 0) {
    return;
  }
  if (na == static_cast<std::size_t>(total) && nb == static_cast<std::size_t>(total)) {
    for (std::int64_t o = 0; o < total; ++o) fn(o, o, o);
    return;
  }
  if (nb == 1 && na == static_cast<std::size_t>(total)) {
    for (std::int64_t o = 0; o < total; ++o) fn(o, o, 0);
    return;
  }
  if (na == 1 && nb == static_cast<std::size_t>(total)) {
    for (std::int64_t o = 0; o < total; ++o) fn(o, 0, o);
    return;
  }
  const std::size_t rank = bc.out.size();
  std::vector<std::int64_t> counter(rank, 0);
  std::int64_t ia = 0;
  std::int64_t ib = 0;
  for (std::int64_t o = 0; o < total; ++o) {
    fn(o, ia, ib);
    for (std::size_t d = rank; d-- > 0;) {
      ++counter[d];
      ia += bc.stride_a[d];
      ib += bc.stride_b[d];
      if (counter[d] < bc.out[d]) {
        break;
      }
      ia -= bc.stride_a[d] * counter[d];
      ib -= bc.stride_b[d] * counter[d];
      counter[d] = 0;
    }
  }
}

template <class F, class DA, class DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, F f, DA dfa, DB dfb) {
  require_finite(a, op);
  require_finite(b, op);
  auto bc = broadcast_shapes(a.shape(), b.shape(), op);
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(static_cast<std::size_t>(numel(bc.out)));
  for_each_broadcast(bc, av.size(), bv.size(), [&](std::int64_t o, std::int64_t ia, std::int64_t ib) {
    out[o] = f(av[ia], bv[ib]);
  });
  Shape shape = bc.out;
  return make_result(std::move(shape), std::move(out), {a, b}, op, [bc, dfa, dfb](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    const auto& g = self.grad;
    const auto& av = pa.value;
    const auto& bv = pb.value;
    if (pa.requires_grad) {
      auto& ga = pa.ensure_grad();
      for_each_broadcast(bc, av.size(), bv.size(), [&](std::int64_t o, std::int64_t ia, std::int64_t ib) {
        ga[ia] += g[o] * dfa(av[ia], bv[ib]);
      });
    }
    if (pb.requires_grad) {
      auto& gb = pb.ensure_grad();
      for_each_broadcast(bc, av.size(), bv.size(), [&](std::int64_t o, std::int64_t ia, std::int64_t ib) {
        gb[ib] += g[o] * dfb(av[ia], bv[ib]);
      });
    }
  });
}

// df receives (input, output).
template <class F, class D>
Tensor unary(const Tensor& x, const char* op, F f, D df) {
  require_finite(x, op);
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = f(xv[i]);
  }
  return make_result(x.shape(), std::move(out), {x}, op, [df](Node& self) {
    auto& p = *self.parents[0];
    auto& gp = p.ensure_grad();
    for (std::size_t i = 0; i < gp.size(); ++i) {
      gp[i] += self.grad[i] * df(p.value[i], self.value[i]);
    }
  });
}

double stable_softplus(double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); }

double stable_sigmoid(double v) {
  if (v >= 0) {
    return 1.0 / (1.0 + std::exp(-v));
  }
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  for (double v : b.values()) {
    if (v == 0.0) {
      throw NumericError("div: division by zero");
    }
  }
  return binary(
      a, b, "div", [](double x, double y) { return x / y; }, [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

Tensor add_scalar(const Tensor& x, double c) {
  return unary(
      x, "add_scalar", [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& x, double c) {
  return unary(
      x, "mul_scalar", [c](double v) { return v * c; }, [c](double, double) { return c; });
}

Tensor neg(const Tensor& x) { return mul_scalar(x, -1.0); }

Tensor exp(const Tensor& x) {
  return unary(
      x, "exp", [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.values()) {
    if (v <= 0.0) {
      throw NumericError("log: non-positive input");
    }
  }
  return unary(
      x, "log", [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor& x) {
  for (double v : x.values()) {
    if (v < 0.0) {
      throw NumericError("sqrt: negative input");
    }
  }
  return unary(
      x, "sqrt", [](double v) { return std::sqrt(v); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, "abs", [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& x) {
  return unary(
      x, "square", [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, "sigmoid", [](double v) { return stable_sigmoid(v); }, [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, "tanh", [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor softplus(const Tensor& x) {
  return unary(
      x, "softplus", [](double v) { return stable_softplus(v); },
      [](double v, double) { return stable_sigmoid(v); });
}

}  // namespace adm::dc
