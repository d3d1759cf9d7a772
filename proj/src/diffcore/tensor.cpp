// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/diffcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace adm::dc {

namespace {
thread_local bool g_grad_enabled = true;
bool g_finite_checks = true;
}  // namespace

std::int64_t numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    n *= d;
  }
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    os << (i ? ", " : "") << shape[i];
  }
  os << ']';
  return os.str();
}

std::vector<double>& Node::ensure_grad() {
  if (grad.size() != value.size()) {
    grad.assign(value.size(), 0.0);
  }
  return grad;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool finite_checks_enabled() { return g_finite_checks; }
void set_finite_checks(bool enabled) { g_finite_checks = enabled; }

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  for (auto d : shape) {
    if (d < 0) {
      throw ShapeError("negative dimension in shape " + to_string(shape));
    }
  }
  auto node = std::make_shared<Node>();
  node->value.assign(static_cast<std::size_t>(dc::numel(shape)), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  if (requires_grad) {
    node->ensure_grad();
  }
  return Tensor(std::move(node));
}

Tensor Tensor::from_vector(Shape shape, std::vector<double> values, bool requires_grad) {
  if (dc::numel(shape) != static_cast<std::int64_t>(values.size())) {
    throw ShapeError("from_vector: shape " + to_string(shape) + " needs " + std::to_string(dc::numel(shape)) +
                     " values, got " + std::to_string(values.size()));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  if (requires_grad) {
    node->ensure_grad();
  }
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from_vector({}, {value}, requires_grad); }

Node& Tensor::checked() const {
  if (!node_) {
    throw std::logic_error("use of undefined Tensor");
  }
  return *node_;
}

const Shape& Tensor::shape() const { return checked().shape; }

std::int64_t Tensor::dim(int axis) const {
  const auto& s = shape();
  const int r = static_cast<int>(s.size());
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + to_string(s));
  }
  return s[static_cast<std::size_t>(a)];
}

std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(checked().value.size()); }

std::span<const double> Tensor::values() const { return checked().value; }

std::span<double> Tensor::mutable_values() {
  auto& n = checked();
  if (!n.is_leaf()) {
    throw std::logic_error("mutable_values on a non-leaf tensor (op " + std::string(n.op) + ")");
  }
  return n.value;
}

double Tensor::item() const {
  const auto& n = checked();
  if (n.value.size() != 1) {
    throw ShapeError("item() on tensor of shape " + to_string(n.shape));
  }
  return n.value[0];
}

double Tensor::at(std::initializer_list<std::int64_t> index) const {
  const auto& n = checked();
  if (index.size() != n.shape.size()) {
    throw ShapeError("at(): rank mismatch for shape " + to_string(n.shape));
  }
  std::int64_t flat = 0;
  std::size_t d = 0;
  for (auto i : index) {
    if (i < 0 || i >= n.shape[d]) {
      throw ShapeError("at(): index out of range for shape " + to_string(n.shape));
    }
    flat = flat * n.shape[d] + i;
    ++d;
  }
  return n.value[static_cast<std::size_t>(flat)];
}

bool Tensor::requires_grad() const { return checked().requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  auto& n = checked();
  if (!n.is_leaf()) {
    throw std::logic_error("set_requires_grad on a non-leaf tensor");
  }
  n.requires_grad = flag;
  if (flag) {
    n.ensure_grad();
  }
}

std::span<const double> Tensor::grad() const { return checked().grad; }

std::span<double> Tensor::mutable_grad() { return checked().ensure_grad(); }

void Tensor::zero_grad() {
  auto& n = checked();
  std::fill(n.grad.begin(), n.grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  const auto& n = checked();
  return from_vector(n.shape, n.value, false);
}

void Tensor::backward() const {
  auto& root = checked();
  if (root.value.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + to_string(root.shape));
  }
  if (!root.requires_grad) {
    throw std::logic_error("backward() on a tensor that does not require grad");
  }

  // Iterative post-order DFS; recursion depth would track graph depth.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(&root, 0);
  seen.insert(&root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  for (Node* n : order) {
    if (!n->is_leaf()) {
      auto& g = n->ensure_grad();
      std::fill(g.begin(), g.end(), 0.0);
    }
  }
  root.ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) {
      n->backward_fn(*n);
    }
  }
}

namespace detail {

void require_finite(const Tensor& t, const char* op) {
  if (!g_finite_checks) {
    return;
  }
  for (double v : t.values()) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + ": non-finite input of shape " + to_string(t.shape()));
    }
  }
}

Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> parents, const char* op,
                   std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) {
      needs = needs || p.requires_grad();
    }
  }
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) {
      node->parents.push_back(p.ptr());
    }
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

}  // namespace detail

}  // namespace adm::dc
