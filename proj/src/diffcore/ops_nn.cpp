// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "adm/diffcore/ops.hpp"

namespace adm::dc {

using detail::make_result;
using detail::require_finite;

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using StridedConst = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;
using StridedMut = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using RowVec = Eigen::Map<Eigen::RowVectorXd>;
using ConstRowVec = Eigen::Map<const Eigen::RowVectorXd>;

double sigmoid_scalar(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// dst[j] += sum_i src[i, j], accumulated in row order. Eigen's column
// reductions over a Map peel by pointer alignment, which makes the rounding
// depend on where the buffer happens to live.
void add_column_sums(double* dst, const double* src, std::int64_t rows, std::int64_t cols) {
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) dst[j] += src[i * cols + j];
  }
}

void check_matmul_shapes(const Tensor& x, const Tensor& w, const char* op) {
  if (w.rank() != 2) {
    throw ShapeError(std::string(op) + ": weight must be 2-d, got " + to_string(w.shape()));
  }
  if (x.rank() < 1 || x.dim(-1) != w.dim(0)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(x.shape()) + " @ " + to_string(w.shape()));
  }
}

}  // namespace

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  const char* op = bias.defined() ? "linear" : "matmul";
  check_matmul_shapes(x, w, op);
  require_finite(x, op);
  require_finite(w, op);
  const std::int64_t k = w.dim(0);
  const std::int64_t n = w.dim(1);
  if (bias.defined()) {
    require_finite(bias, op);
    if (bias.rank() != 1 || bias.dim(0) != n) {
      throw ShapeError(std::string(op) + ": bias shape " + to_string(bias.shape()) + " for output width " +
                       std::to_string(n));
    }
  }
  const std::int64_t m = k == 0 ? 0 : x.numel() / k;
  Shape out_shape = x.shape();
  out_shape.back() = n;
  std::vector<double> out(static_cast<std::size_t>(m * n));
  MutMap y(out.data(), m, n);
  y.noalias() = ConstMap(x.values().data(), m, k) * ConstMap(w.values().data(), k, n);
  if (bias.defined()) {
    y.rowwise() += ConstRowVec(bias.values().data(), n);
  }
  std::vector<Tensor> parents{x, w};
  if (bias.defined()) parents.push_back(bias);
  return make_result(std::move(out_shape), std::move(out), std::move(parents), op, [m, k, n](Node& self) {
    auto& px = *self.parents[0];
    auto& pw = *self.parents[1];
    ConstMap dy(self.grad.data(), m, n);
    if (px.requires_grad) {
      MutMap(px.ensure_grad().data(), m, k).noalias() += dy * ConstMap(pw.value.data(), k, n).transpose();
    }
    if (pw.requires_grad) {
      MutMap(pw.ensure_grad().data(), k, n).noalias() += ConstMap(px.value.data(), m, k).transpose() * dy;
    }
    if (self.parents.size() > 2 && self.parents[2]->requires_grad) {
      add_column_sums(self.parents[2]->ensure_grad().data(), self.grad.data(), m, n);
    }
  });
}

Tensor matmul(const Tensor& x, const Tensor& w) { return linear(x, w, Tensor()); }

Tensor softmax(const Tensor& x) {
  require_finite(x, "softmax");
  if (x.rank() == 0) throw ShapeError("softmax of a scalar");
  const std::int64_t d = x.dim(-1);
  const std::int64_t rows = d == 0 ? 0 : x.numel() / d;
  const auto v = x.values();
  std::vector<double> out(v.size());
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* src = v.data() + r * d;
    double* dst = out.data() + r * d;
    const double mx = *std::max_element(src, src + d);
    double z = 0.0;
    for (std::int64_t i = 0; i < d; ++i) {
      dst[i] = std::exp(src[i] - mx);
      z += dst[i];
    }
    for (std::int64_t i = 0; i < d; ++i) dst[i] /= z;
  }
  return make_result(x.shape(), std::move(out), {x}, "softmax", [rows, d](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::int64_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * d;
      const double* gy = self.grad.data() + r * d;
      double dot = 0.0;
      for (std::int64_t i = 0; i < d; ++i) dot += gy[i] * y[i];
      for (std::int64_t i = 0; i < d; ++i) g[r * d + i] += y[i] * (gy[i] - dot);
    }
  });
}

Tensor log_softmax(const Tensor& x) {
  require_finite(x, "log_softmax");
  if (x.rank() == 0) throw ShapeError("log_softmax of a scalar");
  const std::int64_t d = x.dim(-1);
  const std::int64_t rows = d == 0 ? 0 : x.numel() / d;
  const auto v = x.values();
  std::vector<double> out(v.size());
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* src = v.data() + r * d;
    const double mx = *std::max_element(src, src + d);
    double z = 0.0;
    for (std::int64_t i = 0; i < d; ++i) z += std::exp(src[i] - mx);
    const double lse = mx + std::log(z);
    for (std::int64_t i = 0; i < d; ++i) out[r * d + i] = src[i] - lse;
  }
  return make_result(x.shape(), std::move(out), {x}, "log_softmax", [rows, d](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::int64_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * d;
      const double* gy = self.grad.data() + r * d;
      double total = 0.0;
      for (std::int64_t i = 0; i < d; ++i) total += gy[i];
      for (std::int64_t i = 0; i < d; ++i) g[r * d + i] += gy[i] - std::exp(y[i]) * total;
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_finite(x, "layer_norm");
  require_finite(gamma, "layer_norm");
  require_finite(beta, "layer_norm");
  if (x.rank() == 0) throw ShapeError("layer_norm of a scalar");
  const std::int64_t d = x.dim(-1);
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    throw ShapeError("layer_norm: affine params must be [" + std::to_string(d) + "], got " +
                     to_string(gamma.shape()) + " / " + to_string(beta.shape()));
  }
  const std::int64_t rows = d == 0 ? 0 : x.numel() / d;
  const auto v = x.values();
  const auto gv = gamma.values();
  const auto bv = beta.values();
  auto xhat = std::make_shared<std::vector<double>>(v.size());
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows));
  std::vector<double> out(v.size());
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* src = v.data() + r * d;
    double mu = 0.0;
    for (std::int64_t i = 0; i < d; ++i) mu += src[i];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::int64_t i = 0; i < d; ++i) var += (src[i] - mu) * (src[i] - mu);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::int64_t i = 0; i < d; ++i) {
      const double h = (src[i] - mu) * inv;
      (*xhat)[r * d + i] = h;
      out[r * d + i] = gv[i] * h + bv[i];
    }
  }
  return make_result(x.shape(), std::move(out), {x, gamma, beta}, "layer_norm",
                     [rows, d, xhat, inv_std](Node& self) {
                       auto& px = *self.parents[0];
                       auto& pg = *self.parents[1];
                       auto& pb = *self.parents[2];
                       const auto& gam = pg.value;
                       const auto& g = self.grad;
                       if (pg.requires_grad) {
                         auto& gg = pg.ensure_grad();
                         for (std::int64_t r = 0; r < rows; ++r)
                           for (std::int64_t i = 0; i < d; ++i) gg[i] += g[r * d + i] * (*xhat)[r * d + i];
                       }
                       if (pb.requires_grad) {
                         auto& gb = pb.ensure_grad();
                         for (std::int64_t r = 0; r < rows; ++r)
                           for (std::int64_t i = 0; i < d; ++i) gb[i] += g[r * d + i];
                       }
                       if (px.requires_grad) {
                         auto& gx = px.ensure_grad();
                         const double dd = static_cast<double>(d);
                         for (std::int64_t r = 0; r < rows; ++r) {
                           double s1 = 0.0;
                           double s2 = 0.0;
                           for (std::int64_t i = 0; i < d; ++i) {
                             const double dh = g[r * d + i] * gam[i];
                             s1 += dh;
                             s2 += dh * (*xhat)[r * d + i];
                           }
                           const double inv = (*inv_std)[r];
                           for (std::int64_t i = 0; i < d; ++i) {
                             const double dh = g[r * d + i] * gam[i];
                             gx[r * d + i] += inv / dd * (dd * dh - s1 - (*xhat)[r * d + i] * s2);
                           }
                         }
                       }
                     });
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads,
                 const std::shared_ptr<const AttentionMask>& mask, const Tensor& fallback) {
  require_finite(q, "attention");
  require_finite(k, "attention");
  require_finite(v, "attention");
  if (q.rank() != 3 || k.rank() != 3 || v.rank() != 3) {
    throw ShapeError("attention: q, k, v must be 3-d, got " + to_string(q.shape()) + ", " + to_string(k.shape()) +
                     ", " + to_string(v.shape()));
  }
  const std::int64_t B = q.dim(0);
  const std::int64_t Lq = q.dim(1);
  const std::int64_t D = q.dim(2);
  const std::int64_t Lk = k.dim(1);
  if (k.shape() != v.shape() || k.dim(0) != B || k.dim(2) != D) {
    throw ShapeError("attention: incompatible shapes q " + to_string(q.shape()) + ", k " + to_string(k.shape()) +
                     ", v " + to_string(v.shape()));
  }
  if (heads <= 0 || D % heads != 0) {
    throw ShapeError("attention: width " + std::to_string(D) + " not divisible by " + std::to_string(heads) +
                     " heads");
  }
  if (mask) {
    const auto& ms = mask->shape;
    if (ms.size() != 3 || ms[0] != B || (ms[1] != Lq && ms[1] != 1) || ms[2] != Lk ||
        static_cast<std::int64_t>(mask->allowed.size()) != numel(ms)) {
      throw ShapeError("attention: mask shape " + to_string(ms) + " does not fit scores [" + std::to_string(B) +
                       ", " + std::to_string(Lq) + ", " + std::to_string(Lk) + "]");
    }
  }
  if (fallback.defined()) {
    require_finite(fallback, "attention");
    if (fallback.shape() != q.shape()) {
      throw ShapeError("attention: fallback shape " + to_string(fallback.shape()) + " must equal query shape " +
                       to_string(q.shape()));
    }
  }
  const std::int64_t H = heads;
  const std::int64_t dh = D / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Rows with no admissible key.
  auto empty_row = std::make_shared<std::vector<std::uint8_t>>(static_cast<std::size_t>(B * Lq), 0);
  for (std::int64_t b = 0; b < B; ++b) {
    for (std::int64_t i = 0; i < Lq; ++i) {
      bool any = false;
      for (std::int64_t j = 0; j < Lk && !any; ++j) any = !mask || mask->is_allowed(b, i, j);
      (*empty_row)[b * Lq + i] = any ? 0 : 1;
    }
  }

  auto probs = std::make_shared<std::vector<double>>(static_cast<std::size_t>(B * H * Lq * Lk), 0.0);
  std::vector<double> out(static_cast<std::size_t>(B * Lq * D), 0.0);
  const double* qd = q.values().data();
  const double* kd = k.values().data();
  const double* vd = v.values().data();
  RowMat scores(Lq, Lk);
  for (std::int64_t b = 0; b < B; ++b) {
    for (std::int64_t h = 0; h < H; ++h) {
      StridedConst qh(qd + b * Lq * D + h * dh, Lq, dh, Eigen::OuterStride<>(D));
      StridedConst kh(kd + b * Lk * D + h * dh, Lk, dh, Eigen::OuterStride<>(D));
      StridedConst vh(vd + b * Lk * D + h * dh, Lk, dh, Eigen::OuterStride<>(D));
      scores.noalias() = (qh * kh.transpose()) * scale;
      MutMap a(probs->data() + ((b * H + h) * Lq) * Lk, Lq, Lk);
      for (std::int64_t i = 0; i < Lq; ++i) {
        if ((*empty_row)[b * Lq + i]) continue;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::int64_t j = 0; j < Lk; ++j) {
          if (!mask || mask->is_allowed(b, i, j)) mx = std::max(mx, scores(i, j));
        }
        double z = 0.0;
        for (std::int64_t j = 0; j < Lk; ++j) {
          const double e = (!mask || mask->is_allowed(b, i, j)) ? std::exp(scores(i, j) - mx) : 0.0;
          a(i, j) = e;
          z += e;
        }
        a.row(i) /= z;
      }
      StridedMut oh(out.data() + b * Lq * D + h * dh, Lq, dh, Eigen::OuterStride<>(D));
      oh.noalias() = a * vh;
    }
    if (fallback.defined()) {
      const double* fd = fallback.values().data();
      for (std::int64_t i = 0; i < Lq; ++i) {
        if ((*empty_row)[b * Lq + i]) {
          std::copy_n(fd + (b * Lq + i) * D, D, out.data() + (b * Lq + i) * D);
        }
      }
    }
  }

  std::vector<Tensor> parents{q, k, v};
  if (fallback.defined()) parents.push_back(fallback);
  return make_result(
      q.shape(), std::move(out), std::move(parents), "attention",
      [B, Lq, Lk, D, H, dh, scale, probs, empty_row](Node& self) {
        auto& pq = *self.parents[0];
        auto& pk = *self.parents[1];
        auto& pv = *self.parents[2];
        double* gq = pq.requires_grad ? pq.ensure_grad().data() : nullptr;
        double* gk = pk.requires_grad ? pk.ensure_grad().data() : nullptr;
        double* gv = pv.requires_grad ? pv.ensure_grad().data() : nullptr;
        const double* go = self.grad.data();
        RowMat da(Lq, Lk);
        RowMat ds(Lq, Lk);
        for (std::int64_t b = 0; b < B; ++b) {
          for (std::int64_t h = 0; h < H; ++h) {
            ConstMap a(probs->data() + ((b * H + h) * Lq) * Lk, Lq, Lk);
            StridedConst doh(go + b * Lq * D + h * dh, Lq, dh, Eigen::OuterStride<>(D));
            StridedConst qh(pq.value.data() + b * Lq * D + h * dh, Lq, dh, Eigen::OuterStride<>(D));
            StridedConst kh(pk.value.data() + b * Lk * D + h * dh, Lk, dh, Eigen::OuterStride<>(D));
            StridedConst vh(pv.value.data() + b * Lk * D + h * dh, Lk, dh, Eigen::OuterStride<>(D));
            if (gv) {
              StridedMut(gv + b * Lk * D + h * dh, Lk, dh, Eigen::OuterStride<>(D)).noalias() += a.transpose() * doh;
            }
            if (!gq && !gk) continue;
            da.noalias() = doh * vh.transpose();
            for (std::int64_t i = 0; i < Lq; ++i) {
              const double dot = a.row(i).dot(da.row(i));
              ds.row(i) = a.row(i).cwiseProduct((da.row(i).array() - dot).matrix());
            }
            if (gq) {
              StridedMut(gq + b * Lq * D + h * dh, Lq, dh, Eigen::OuterStride<>(D)).noalias() += (ds * kh) * scale;
            }
            if (gk) {
              StridedMut(gk + b * Lk * D + h * dh, Lk, dh, Eigen::OuterStride<>(D)).noalias() +=
                  (ds.transpose() * qh) * scale;
            }
          }
        }
        if (self.parents.size() > 3 && self.parents[3]->requires_grad) {
          auto& gf = self.parents[3]->ensure_grad();
          for (std::int64_t r = 0; r < B * Lq; ++r) {
            if (!(*empty_row)[r]) continue;
            for (std::int64_t c = 0; c < D; ++c) gf[r * D + c] += go[r * D + c];
          }
        }
      });
}

Tensor gru_cell(const Tensor& x, const Tensor& h, const Tensor& w_ih, const Tensor& w_hh, const Tensor& b_ih,
                const Tensor& b_hh) {
  for (const auto* t : {&x, &h, &w_ih, &w_hh, &b_ih, &b_hh}) require_finite(*t, "gru_cell");
  if (x.rank() != 2 || h.rank() != 2 || x.dim(0) != h.dim(0)) {
    throw ShapeError("gru_cell: x " + to_string(x.shape()) + " and h " + to_string(h.shape()) +
                     " must be [B, I] and [B, H]");
  }
  const std::int64_t B = x.dim(0);
  const std::int64_t I = x.dim(1);
  const std::int64_t H = h.dim(1);
  if (w_ih.shape() != Shape{I, 3 * H} || w_hh.shape() != Shape{H, 3 * H} || b_ih.shape() != Shape{3 * H} ||
      b_hh.shape() != Shape{3 * H}) {
    throw ShapeError("gru_cell: parameter shapes do not match input " + std::to_string(I) + " / hidden " +
                     std::to_string(H));
  }
  RowMat gi = ConstMap(x.values().data(), B, I) * ConstMap(w_ih.values().data(), I, 3 * H);
  gi.rowwise() += ConstRowVec(b_ih.values().data(), 3 * H);
  RowMat gh = ConstMap(h.values().data(), B, H) * ConstMap(w_hh.values().data(), H, 3 * H);
  gh.rowwise() += ConstRowVec(b_hh.values().data(), 3 * H);

  // Saved activations: r, z, n, gh_n, each [B, H].
  auto saved = std::make_shared<std::vector<double>>(static_cast<std::size_t>(4 * B * H));
  std::vector<double> out(static_cast<std::size_t>(B * H));
  const double* hv = h.values().data();
  for (std::int64_t b = 0; b < B; ++b) {
    for (std::int64_t j = 0; j < H; ++j) {
      const double r = sigmoid_scalar(gi(b, j) + gh(b, j));
      const double z = sigmoid_scalar(gi(b, H + j) + gh(b, H + j));
      const double ghn = gh(b, 2 * H + j);
      const double n = std::tanh(gi(b, 2 * H + j) + r * ghn);
      const std::size_t idx = static_cast<std::size_t>(b * H + j);
      (*saved)[idx] = r;
      (*saved)[B * H + idx] = z;
      (*saved)[2 * B * H + idx] = n;
      (*saved)[3 * B * H + idx] = ghn;
      out[idx] = (1.0 - z) * n + z * hv[idx];
    }
  }
  return make_result({B, H}, std::move(out), {x, h, w_ih, w_hh, b_ih, b_hh}, "gru_cell",
                     [B, I, H, saved](Node& self) {
                       auto& px = *self.parents[0];
                       auto& ph = *self.parents[1];
                       auto& pwi = *self.parents[2];
                       auto& pwh = *self.parents[3];
                       auto& pbi = *self.parents[4];
                       auto& pbh = *self.parents[5];
                       RowMat dgi(B, 3 * H);
                       RowMat dgh(B, 3 * H);
                       const auto& s = *saved;
                       std::vector<double> dh_direct(static_cast<std::size_t>(B * H));
                       for (std::int64_t b = 0; b < B; ++b) {
                         for (std::int64_t j = 0; j < H; ++j) {
                           const std::size_t idx = static_cast<std::size_t>(b * H + j);
                           const double r = s[idx];
                           const double z = s[B * H + idx];
                           const double n = s[2 * B * H + idx];
                           const double ghn = s[3 * B * H + idx];
                           const double g = self.grad[idx];
                           const double dn = g * (1.0 - z);
                           const double dz = g * (ph.value[idx] - n);
                           dh_direct[idx] = g * z;
                           const double dn_pre = dn * (1.0 - n * n);
                           const double dr_pre = dn_pre * ghn * r * (1.0 - r);
                           const double dz_pre = dz * z * (1.0 - z);
                           dgi(b, j) = dr_pre;
                           dgi(b, H + j) = dz_pre;
                           dgi(b, 2 * H + j) = dn_pre;
                           dgh(b, j) = dr_pre;
                           dgh(b, H + j) = dz_pre;
                           dgh(b, 2 * H + j) = dn_pre * r;
                         }
                       }
                       if (px.requires_grad) {
                         MutMap(px.ensure_grad().data(), B, I).noalias() +=
                             dgi * ConstMap(pwi.value.data(), I, 3 * H).transpose();
                       }
                       if (ph.requires_grad) {
                         MutMap gh(ph.ensure_grad().data(), B, H);
                         gh.noalias() += dgh * ConstMap(pwh.value.data(), H, 3 * H).transpose();
                         gh += ConstMap(dh_direct.data(), B, H);
                       }
                       if (pwi.requires_grad) {
                         MutMap(pwi.ensure_grad().data(), I, 3 * H).noalias() +=
                             ConstMap(px.value.data(), B, I).transpose() * dgi;
                       }
                       if (pwh.requires_grad) {
                         MutMap(pwh.ensure_grad().data(), H, 3 * H).noalias() +=
                             ConstMap(ph.value.data(), B, H).transpose() * dgh;
                       }
                       if (pbi.requires_grad) add_column_sums(pbi.ensure_grad().data(), dgi.data(), dgi.rows(), 3 * H);
                       if (pbh.requires_grad) add_column_sums(pbh.ensure_grad().data(), dgh.data(), dgh.rows(), 3 * H);
                     });
}

}  // namespace adm::dc
