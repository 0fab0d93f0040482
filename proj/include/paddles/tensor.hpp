// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace paddles {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

/// Receives the cotangent of an op's output and accumulates (+=) into the
/// cotangent buffers of its inputs. `grad_in[i]` is null when input i does
/// not require a gradient.
using BackwardFn =
    std::function<void(std::span<const double> grad_out, std::span<std::vector<double>* const> grad_in)>;

/// One record of the gradient graph. Ids come from a process-wide counter,
/// so a node's inputs always carry smaller ids than the node itself and
/// "append order" is simply id order.
struct Node {
  std::uint64_t id = 0;
  const char* op = "leaf";
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool has_grad = false;
  bool requires_grad = false;
  bool frozen = false;
  std::string name;
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;
};

}  // namespace detail

/// Dense row-major float64 array that participates in reverse-mode
/// differentiation. Copies share the underlying node (handle semantics).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> values() const;
  /// Mutable access for in-place updates of leaves (parameters, inputs).
  std::span<double> mutable_values();
  double item() const;
  double at(std::size_t flat_index) const { return values()[flat_index]; }

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool is_leaf() const;

  /// Frozen parameters keep requires_grad off and are skipped by optimizers.
  bool frozen() const;
  void set_frozen(bool flag);

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  /// Allocates (if needed) and fills the gradient with zeros.
  void zero_grad();
  /// Drops the gradient buffer entirely.
  void clear_grad();

  const std::string& name() const;
  void set_name(std::string name);
  std::uint64_t node_id() const;
  const char* op_name() const;

  /// Deep copy of the values as a fresh leaf.
  Tensor clone(bool requires_grad = false) const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  friend Tensor make_op_result(const char*, Shape, std::vector<double>, std::vector<Tensor>, detail::BackwardFn);

  std::shared_ptr<detail::Node> node_;
};

/// Whether new operations record backward edges on this thread.
bool grad_enabled();

/// Disables graph recording for its lifetime (evaluation passes).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Appends an operation to the gradient graph. The result requires a
/// gradient iff any input does; otherwise `backward` is dropped and the
/// result is a plain leaf.
Tensor make_op_result(const char* op, Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                      detail::BackwardFn backward);

/// Reverse-mode sweep from a scalar loss. Every reachable tensor that
/// requires a gradient has its cotangent summed into grad(). Nodes are
/// visited once each, in reverse append order. A loss that does not depend
/// on any gradient-tracked tensor is a no-op.
void backward(const Tensor& loss);

/// Forward-transparent graph cut: a new leaf holding a bit-identical copy
/// of x's values, with no edge back to x.
Tensor stop_gradient(const Tensor& x);

}  // namespace paddles
