// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameterized building blocks. Each layer registers its parameters in a
// ParamStore under a dotted name prefix and keeps handles to them.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "adm/diffcore/ops.hpp"
#include "adm/diffcore/param_store.hpp"

namespace adm::dc {

class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::int64_t in, std::int64_t out, Rng& rng,
         bool bias = true);

  Tensor operator()(const Tensor& x) const { return linear(x, weight_, bias_); }

  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }
  std::int64_t in_features() const { return weight_.dim(0); }
  std::int64_t out_features() const { return weight_.dim(1); }

 private:
  Tensor weight_;
  Tensor bias_;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, std::int64_t dim);

  Tensor operator()(const Tensor& x) const { return layer_norm(x, gamma_, beta_); }

 private:
  Tensor gamma_;
  Tensor beta_;
};

// Linear layers with ReLU in between; `norm_hidden` inserts a LayerNorm
// before each hidden ReLU.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParamStore& store, const std::string& name, const std::vector<std::int64_t>& widths, Rng& rng,
      bool norm_hidden = false);

  Tensor operator()(const Tensor& x) const;

 private:
  std::vector<Linear> layers_;
  std::vector<LayerNorm> norms_;
};

class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParamStore& store, const std::string& name, std::int64_t dim, std::int64_t hidden, Rng& rng);

  Tensor operator()(const Tensor& x) const { return down_(relu(up_(x))); }

 private:
  Linear up_;
  Linear down_;
};

/// Multi-head attention with learned projections.
class MultiHeadAttention {
 public:
  struct Bias {
    Tensor key;    // added to projected keys, [B, Lk, D]
    Tensor value;  // added to projected values, [B, Lk, D]
  };

  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& store, const std::string& name, std::int64_t dim, int heads, Rng& rng,
                     std::int64_t context_dim = -1);

  // query [B, Lq, D], context [B, Lk, Dc] -> [B, Lq, D]. Query rows with no
  // admissible key fall back to the value projection of the query itself.
  Tensor operator()(const Tensor& query, const Tensor& context,
                    const std::shared_ptr<const AttentionMask>& mask = nullptr, const Bias& bias = {}) const;

  int heads() const { return heads_; }

 private:
  Linear q_;
  Linear k_;
  Linear v_;
  Linear o_;
  Linear self_v_;
  int heads_ = 1;
};

/// Stacked GRU; the input of layer l > 0 is the hidden sequence of layer l-1.
class Gru {
 public:
  Gru() = default;
  Gru(ParamStore& store, const std::string& name, std::int64_t input, std::int64_t hidden, int layers, Rng& rng);

  // steps: T tensors of shape [B, input]. Returns the top layer's final state.
  Tensor final_state(const std::vector<Tensor>& steps) const;

  int layers() const { return static_cast<int>(cells_.size()); }
  std::int64_t hidden() const { return hidden_; }

 private:
  struct Cell {
    Tensor w_ih, w_hh, b_ih, b_hh;
  };
  std::vector<Cell> cells_;
  std::int64_t hidden_ = 0;
};

}  // namespace adm::dc
