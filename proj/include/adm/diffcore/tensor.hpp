// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense N-d arrays with reverse-mode gradient accumulation.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adm::dc {

using Shape = std::vector<std::int64_t>;

std::int64_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// One vertex of the computation graph. Leaves have no parents; interior
/// nodes carry the closure that pushes their gradient into their parents.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward_fn;
  const char* op = "leaf";

  bool is_leaf() const { return parents.empty(); }
  std::vector<double>& ensure_grad();
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_vector(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  // Negative axes count from the back.
  std::int64_t dim(int axis) const;
  std::int64_t numel() const;

  std::span<const double> values() const;
  // Writable view; only leaves may be mutated in place.
  std::span<double> mutable_values();
  double item() const;
  double at(std::initializer_list<std::int64_t> index) const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  // Gradient accumulator; empty span until a backward pass reached this node.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Accumulates dThis/dLeaf into every requires_grad leaf. Scalar only.
  void backward() const;

  // Value copy without graph history.
  Tensor detach() const;

  Node* node() const { return node_.get(); }
  const NodePtr& ptr() const { return node_; }

 private:
  Node& checked() const;
  NodePtr node_;
};

/// Graph recording switch, thread-local.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Input finiteness checks on every op (on by default).
bool finite_checks_enabled();
void set_finite_checks(bool enabled);

namespace detail {

void require_finite(const Tensor& t, const char* op);

// Wraps a freshly computed value as an op output. The backward closure is
// only attached when recording is on and some parent needs a gradient.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                   const char* op, std::function<void(Node&)> backward_fn);

}  // namespace detail

}  // namespace adm::dc
