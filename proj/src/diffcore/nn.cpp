// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/diffcore/nn.hpp"

namespace adm::dc {

namespace {

bool has_empty_row(const AttentionMask& mask) {
  const std::int64_t rows = mask.shape[0] * mask.shape[1];
  const std::int64_t lk = mask.shape[2];
  for (std::int64_t r = 0; r < rows; ++r) {
    bool any = false;
    for (std::int64_t j = 0; j < lk && !any; ++j) any = mask.allowed[static_cast<std::size_t>(r * lk + j)] != 0;
    if (!any) return true;
  }
  return false;
}

}  // namespace

Linear::Linear(ParamStore& store, const std::string& name, std::int64_t in, std::int64_t out, Rng& rng, bool bias) {
  weight_ = store.add(name + ".weight", {in, out}, Init::fan_in(in), rng);
  if (bias) {
    bias_ = store.add(name + ".bias", {out}, Init::fan_in(in), rng);
  }
}

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, std::int64_t dim) {
  Rng unused;
  gamma_ = store.add(name + ".gamma", {dim}, Init::ones(), unused);
  beta_ = store.add(name + ".beta", {dim}, Init::zeros(), unused);
}

Mlp::Mlp(ParamStore& store, const std::string& name, const std::vector<std::int64_t>& widths, Rng& rng,
         bool norm_hidden) {
  if (widths.size() < 2) {
    throw std::invalid_argument("Mlp '" + name + "' needs at least input and output widths");
  }
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers_.emplace_back(store, name + "." + std::to_string(i), widths[i], widths[i + 1], rng);
    if (norm_hidden && i + 2 < widths.size()) {
      norms_.emplace_back(store, name + ".norm" + std::to_string(i), widths[i + 1]);
    }
  }
}

Tensor Mlp::operator()(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i](h);
    if (i + 1 < layers_.size()) {
      if (!norms_.empty()) h = norms_[i](h);
      h = relu(h);
    }
  }
  return h;
}

FeedForward::FeedForward(ParamStore& store, const std::string& name, std::int64_t dim, std::int64_t hidden,
                         Rng& rng)
    : up_(store, name + ".up", dim, hidden, rng), down_(store, name + ".down", hidden, dim, rng) {}

MultiHeadAttention::MultiHeadAttention(ParamStore& store, const std::string& name, std::int64_t dim, int heads,
                                       Rng& rng, std::int64_t context_dim)
    : heads_(heads) {
  if (context_dim < 0) context_dim = dim;
  q_ = Linear(store, name + ".q", dim, dim, rng);
  k_ = Linear(store, name + ".k", context_dim, dim, rng);
  v_ = Linear(store, name + ".v", context_dim, dim, rng);
  o_ = Linear(store, name + ".o", dim, dim, rng);
  if (context_dim != dim) {
    self_v_ = Linear(store, name + ".self_v", dim, dim, rng);
  }
}

Tensor MultiHeadAttention::operator()(const Tensor& query, const Tensor& context,
                                      const std::shared_ptr<const AttentionMask>& mask, const Bias& bias) const {
  Tensor q = q_(query);
  Tensor k = k_(context);
  Tensor v = v_(context);
  if (bias.key.defined()) k = k + bias.key;
  if (bias.value.defined()) v = v + bias.value;
  Tensor fallback;
  if (mask && has_empty_row(*mask)) {
    fallback = self_v_.weight().defined() ? self_v_(query) : v_(query);
  }
  return o_(attention(q, k, v, heads_, mask, fallback));
}

Gru::Gru(ParamStore& store, const std::string& name, std::int64_t input, std::int64_t hidden, int layers, Rng& rng)
    : hidden_(hidden) {
  for (int l = 0; l < layers; ++l) {
    const std::string p = name + ".l" + std::to_string(l);
    const std::int64_t in = l == 0 ? input : hidden;
    Cell c;
    c.w_ih = store.add(p + ".w_ih", {in, 3 * hidden}, Init::fan_in(hidden), rng);
    c.w_hh = store.add(p + ".w_hh", {hidden, 3 * hidden}, Init::fan_in(hidden), rng);
    c.b_ih = store.add(p + ".b_ih", {3 * hidden}, Init::fan_in(hidden), rng);
    c.b_hh = store.add(p + ".b_hh", {3 * hidden}, Init::fan_in(hidden), rng);
    cells_.push_back(std::move(c));
  }
}

Tensor Gru::final_state(const std::vector<Tensor>& steps) const {
  if (steps.empty()) {
    throw ShapeError("Gru::final_state: empty sequence");
  }
  std::vector<Tensor> seq = steps;
  const std::int64_t batch = steps.front().dim(0);
  for (const auto& cell : cells_) {
    Tensor h = Tensor::zeros({batch, hidden_});
    for (auto& x : seq) {
      h = gru_cell(x, h, cell.w_ih, cell.w_hh, cell.b_ih, cell.b_hh);
      x = h;
    }
  }
  return seq.back();
}

}  // namespace adm::dc
