// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/diffcore/param_store.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace adm::dc {

namespace {
bool has_prefix(std::string_view name, std::string_view prefix) { return name.substr(0, prefix.size()) == prefix; }
}  // namespace

Init Init::fan_in(std::int64_t fan_in) {
  return {Kind::kUniform, fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0};
}

Tensor ParamStore::add(const std::string& name, Shape shape, Init init, Rng& rng) {
  if (index_.count(name)) {
    throw std::invalid_argument("duplicate parameter name '" + name + "'");
  }
  const auto n = static_cast<std::size_t>(numel(shape));
  std::vector<double> values(n, 0.0);
  switch (init.kind) {
    case Init::Kind::kZeros:
      break;
    case Init::Kind::kOnes:
      std::fill(values.begin(), values.end(), 1.0);
      break;
    case Init::Kind::kUniform: {
      std::uniform_real_distribution<double> dist(-init.scale, init.scale);
      for (auto& v : values) v = dist(rng);
      break;
    }
    case Init::Kind::kNormal: {
      std::normal_distribution<double> dist(0.0, init.scale);
      for (auto& v : values) v = dist(rng);
      break;
    }
  }
  Tensor t = Tensor::from_vector(std::move(shape), std::move(values), true);
  index_.emplace(name, entries_.size());
  entries_.push_back({name, t, AdamState{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0}});
  return t;
}

bool ParamStore::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

const Tensor& ParamStore::at(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  }
  return entries_[it->second].param;
}

Tensor& ParamStore::at(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const ParamStore&>(*this).at(name));
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::int64_t ParamStore::scalar_count(std::string_view prefix) const {
  std::int64_t n = 0;
  for (const auto& e : entries_) {
    if (has_prefix(e.name, prefix)) n += e.param.numel();
  }
  return n;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.param.zero_grad();
}

void ParamStore::set_trainable(std::string_view prefix, bool trainable) {
  for (auto& e : entries_) {
    if (has_prefix(e.name, prefix)) {
      e.param.set_requires_grad(trainable);
      if (!trainable) e.param.zero_grad();
    }
  }
}

double ParamStore::grad_norm() const {
  double total = 0.0;
  for (const auto& e : entries_) {
    if (!e.param.requires_grad()) continue;
    for (double g : e.param.grad()) total += g * g;
  }
  return std::sqrt(total);
}

double ParamStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& e : entries_) {
      if (!e.param.requires_grad()) continue;
      for (auto& g : e.param.mutable_grad()) g *= s;
    }
  }
  return norm;
}

std::uint64_t ParamStore::checksum(std::string_view prefix) const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& e : entries_) {
    if (!has_prefix(e.name, prefix)) continue;
    mix(e.name.data(), e.name.size());
    const auto v = e.param.values();
    mix(v.data(), v.size() * sizeof(double));
  }
  return h;
}

void adamw_step(ParamStore& store, double lr, double weight_decay, const AdamWOptions& options) {
  for (auto& e : store.entries()) {
    if (!e.param.requires_grad()) continue;
    const auto g = e.param.grad();
    for (double gi : g) {
      if (!std::isfinite(gi)) {
        throw NumericError("adamw_step: non-finite gradient in '" + e.name + "'");
      }
    }
  }
  for (auto& e : store.entries()) {
    if (!e.param.requires_grad()) continue;
    auto& st = e.adam;
    st.step += 1;
    const double bc1 = 1.0 - std::pow(options.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(options.beta2, static_cast<double>(st.step));
    auto w = e.param.mutable_values();
    const auto g = e.param.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      st.m[i] = options.beta1 * st.m[i] + (1.0 - options.beta1) * gi;
      st.v[i] = options.beta2 * st.v[i] + (1.0 - options.beta2) * gi * gi;
      const double m_hat = st.m[i] / bc1;
      const double v_hat = st.v[i] / bc2;
      w[i] *= 1.0 - lr * weight_decay;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

}  // namespace adm::dc
