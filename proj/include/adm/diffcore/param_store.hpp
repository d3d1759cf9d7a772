// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "adm/diffcore/tensor.hpp"

namespace adm::dc {

using Rng = std::mt19937_64;

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

/// Initialization rule for a new parameter.
struct Init {
  enum class Kind { kZeros, kOnes, kUniform, kNormal } kind = Kind::kZeros;
  double scale = 0.0;

  static Init zeros() { return {Kind::kZeros, 0.0}; }
  static Init ones() { return {Kind::kOnes, 0.0}; }
  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static Init fan_in(std::int64_t fan_in);
  static Init uniform(double bound) { return {Kind::kUniform, bound}; }
  static Init normal(double stddev) { return {Kind::kNormal, stddev}; }
};

/// Named, ordered set of trainable leaves plus their optimizer state.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor param;
    AdamState adam;
  };

  Tensor add(const std::string& name, Shape shape, Init init, Rng& rng);

  bool contains(std::string_view name) const;
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<std::string> names() const;

  // Total scalar count of parameters whose name starts with `prefix`.
  std::int64_t scalar_count(std::string_view prefix = "") const;

  void zero_grad();
  // Marks every parameter under `prefix` as (non-)trainable. Frozen
  // parameters still pass gradients through to their inputs.
  void set_trainable(std::string_view prefix, bool trainable);

  double grad_norm() const;
  // Rescales gradients so the global L2 norm is at most max_norm. Returns the
  // norm measured before clipping.
  double clip_grad_norm(double max_norm);

  // Order-sensitive hash of the raw parameter bytes under `prefix`.
  std::uint64_t checksum(std::string_view prefix = "") const;

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One decoupled-weight-decay Adam update of every trainable parameter.
void adamw_step(ParamStore& store, double lr, double weight_decay, const AdamWOptions& options = {});

}  // namespace adm::dc
