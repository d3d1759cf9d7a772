// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>

#include "adm/diffcore/ops.hpp"

namespace adm::dc {

using detail::make_result;
using detail::require_finite;

namespace {

int normalize_axis(int axis, std::size_t rank, const char* op) {
  const int r = static_cast<int>(rank);
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(rank));
  }
  return a;
}

struct AxisSplit {
  std::int64_t outer = 1;
  std::int64_t n = 1;
  std::int64_t inner = 1;
};

AxisSplit split_at(const Shape& s, int axis) {
  AxisSplit sp;
  for (int i = 0; i < axis; ++i) sp.outer *= s[i];
  sp.n = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) sp.inner *= s[i];
  return sp;
}

}  // namespace

Tensor sum(const Tensor& x) {
  require_finite(x, "sum");
  const auto v = x.values();
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  return make_result({}, {total}, {x}, "sum", [](Node& self) {
    auto& p = *self.parents[0];
    auto& g = p.ensure_grad();
    for (auto& gi : g) gi += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) {
    throw ShapeError("mean of empty tensor");
  }
  return mul_scalar(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor sum(const Tensor& x, int axis, bool keepdim) {
  require_finite(x, "sum_axis");
  const int a = normalize_axis(axis, x.rank(), "sum");
  const auto sp = split_at(x.shape(), a);
  const auto v = x.values();
  std::vector<double> out(static_cast<std::size_t>(sp.outer * sp.inner), 0.0);
  for (std::int64_t o = 0; o < sp.outer; ++o) {
    for (std::int64_t j = 0; j < sp.n; ++j) {
      const double* src = v.data() + (o * sp.n + j) * sp.inner;
      double* dst = out.data() + o * sp.inner;
      for (std::int64_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
    }
  }
  Shape shape = x.shape();
  if (keepdim) {
    shape[a] = 1;
  } else {
    shape.erase(shape.begin() + a);
  }
  return make_result(std::move(shape), std::move(out), {x}, "sum_axis", [sp](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::int64_t o = 0; o < sp.outer; ++o) {
      const double* src = self.grad.data() + o * sp.inner;
      for (std::int64_t j = 0; j < sp.n; ++j) {
        double* dst = g.data() + (o * sp.n + j) * sp.inner;
        for (std::int64_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
      }
    }
  });
}

Tensor mean(const Tensor& x, int axis, bool keepdim) {
  const auto n = x.dim(axis);
  if (n == 0) {
    throw ShapeError("mean over empty axis");
  }
  return mul_scalar(sum(x, axis, keepdim), 1.0 / static_cast<double>(n));
}

Tensor reshape(const Tensor& x, Shape shape) {
  std::int64_t known = 1;
  int infer = -1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == -1) {
      if (infer >= 0) throw ShapeError("reshape: more than one -1");
      infer = static_cast<int>(i);
    } else {
      known *= shape[i];
    }
  }
  if (infer >= 0) {
    if (known == 0 || x.numel() % known != 0) {
      throw ShapeError("reshape: cannot infer dimension for " + to_string(x.shape()));
    }
    shape[infer] = x.numel() / known;
  }
  if (numel(shape) != x.numel()) {
    throw ShapeError("reshape: " + to_string(x.shape()) + " -> " + to_string(shape));
  }
  const auto v = x.values();
  return make_result(std::move(shape), std::vector<double>(v.begin(), v.end()), {x}, "reshape", [](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor permute(const Tensor& x, const std::vector<int>& perm) {
  const auto& in = x.shape();
  const std::size_t rank = in.size();
  if (perm.size() != rank) {
    throw ShapeError("permute: permutation rank mismatch for " + to_string(in));
  }
  std::vector<bool> used(rank, false);
  for (int p : perm) {
    if (p < 0 || p >= static_cast<int>(rank) || used[p]) {
      throw ShapeError("permute: invalid permutation");
    }
    used[p] = true;
  }
  std::vector<std::int64_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * in[i];
  Shape out_shape(rank);
  std::vector<std::int64_t> src_stride(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    out_shape[i] = in[perm[i]];
    src_stride[i] = in_strides[perm[i]];
  }
  const std::int64_t total = x.numel();
  // map[o] = source offset of output element o.
  auto map = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(total));
  {
    std::vector<std::int64_t> counter(rank, 0);
    std::int64_t src = 0;
    for (std::int64_t o = 0; o < total; ++o) {
      (*map)[o] = src;
      for (std::size_t d = rank; d-- > 0;) {
        ++counter[d];
        src += src_stride[d];
        if (counter[d] < out_shape[d]) break;
        src -= src_stride[d] * counter[d];
        counter[d] = 0;
      }
    }
  }
  const auto v = x.values();
  std::vector<double> out(static_cast<std::size_t>(total));
  for (std::int64_t o = 0; o < total; ++o) out[o] = v[(*map)[o]];
  return make_result(std::move(out_shape), std::move(out), {x}, "permute", [map](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t o = 0; o < map->size(); ++o) g[(*map)[o]] += self.grad[o];
  });
}

Tensor transpose(const Tensor& x, int axis_a, int axis_b) {
  const auto rank = x.rank();
  const int a = normalize_axis(axis_a, rank, "transpose");
  const int b = normalize_axis(axis_b, rank, "transpose");
  std::vector<int> perm(rank);
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[a], perm[b]);
  return permute(x, perm);
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) {
    throw ShapeError("concat: no inputs");
  }
  const auto& first = parts.front().shape();
  const int a = normalize_axis(axis, first.size(), "concat");
  std::vector<std::int64_t> sizes;
  std::int64_t total_n = 0;
  for (const auto& p : parts) {
    require_finite(p, "concat");
    const auto& s = p.shape();
    if (s.size() != first.size()) {
      throw ShapeError("concat: rank mismatch " + to_string(first) + " vs " + to_string(s));
    }
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (static_cast<int>(d) != a && s[d] != first[d]) {
        throw ShapeError("concat: shape mismatch " + to_string(first) + " vs " + to_string(s) + " on axis " +
                         std::to_string(d));
      }
    }
    sizes.push_back(s[a]);
    total_n += s[a];
  }
  Shape out_shape = first;
  out_shape[a] = total_n;
  const auto sp = split_at(out_shape, a);
  std::vector<double> out(static_cast<std::size_t>(numel(out_shape)));
  std::int64_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto v = parts[k].values();
    const std::int64_t block = sizes[k] * sp.inner;
    for (std::int64_t o = 0; o < sp.outer; ++o) {
      std::copy_n(v.data() + o * block, block, out.data() + o * sp.n * sp.inner + offset * sp.inner);
    }
    offset += sizes[k];
  }
  return make_result(std::move(out_shape), std::move(out), parts, "concat", [sizes, sp](Node& self) {
    std::int64_t offset = 0;
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      auto& p = *self.parents[k];
      const std::int64_t block = sizes[k] * sp.inner;
      if (p.requires_grad) {
        auto& g = p.ensure_grad();
        for (std::int64_t o = 0; o < sp.outer; ++o) {
          const double* src = self.grad.data() + o * sp.n * sp.inner + offset * sp.inner;
          double* dst = g.data() + o * block;
          for (std::int64_t i = 0; i < block; ++i) dst[i] += src[i];
        }
      }
      offset += sizes[k];
    }
  });
}

Tensor slice(const Tensor& x, int axis, std::int64_t begin, std::int64_t end) {
  const int a = normalize_axis(axis, x.rank(), "slice");
  const auto sp = split_at(x.shape(), a);
  if (begin < 0 || end > sp.n || begin > end) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) + ") invalid for " +
                     to_string(x.shape()));
  }
  const std::int64_t m = end - begin;
  Shape out_shape = x.shape();
  out_shape[a] = m;
  const auto v = x.values();
  std::vector<double> out(static_cast<std::size_t>(sp.outer * m * sp.inner));
  for (std::int64_t o = 0; o < sp.outer; ++o) {
    std::copy_n(v.data() + (o * sp.n + begin) * sp.inner, m * sp.inner, out.data() + o * m * sp.inner);
  }
  return make_result(std::move(out_shape), std::move(out), {x}, "slice", [sp, begin, m](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::int64_t o = 0; o < sp.outer; ++o) {
      const double* src = self.grad.data() + o * m * sp.inner;
      double* dst = g.data() + (o * sp.n + begin) * sp.inner;
      for (std::int64_t i = 0; i < m * sp.inner; ++i) dst[i] += src[i];
    }
  });
}

Tensor index_select(const Tensor& x, int axis, const std::vector<std::int64_t>& index) {
  const int a = normalize_axis(axis, x.rank(), "index_select");
  const auto sp = split_at(x.shape(), a);
  for (auto i : index) {
    if (i < 0 || i >= sp.n) {
      throw ShapeError("index_select: index " + std::to_string(i) + " out of range for " + to_string(x.shape()));
    }
  }
  const auto m = static_cast<std::int64_t>(index.size());
  Shape out_shape = x.shape();
  out_shape[a] = m;
  const auto v = x.values();
  std::vector<double> out(static_cast<std::size_t>(sp.outer * m * sp.inner));
  for (std::int64_t o = 0; o < sp.outer; ++o) {
    for (std::int64_t j = 0; j < m; ++j) {
      std::copy_n(v.data() + (o * sp.n + index[j]) * sp.inner, sp.inner, out.data() + (o * m + j) * sp.inner);
    }
  }
  return make_result(std::move(out_shape), std::move(out), {x}, "index_select", [sp, index, m](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::int64_t o = 0; o < sp.outer; ++o) {
      for (std::int64_t j = 0; j < m; ++j) {
        const double* src = self.grad.data() + (o * m + j) * sp.inner;
        double* dst = g.data() + (o * sp.n + index[j]) * sp.inner;
        for (std::int64_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
      }
    }
  });
}

}  // namespace adm::dc
