// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "paddles/errors.hpp"

namespace paddles {

namespace {

std::atomic<std::uint64_t> next_node_id{1};
thread_local bool recording = true;

std::shared_ptr<detail::Node> new_node(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("tensor of shape " + shape_str(shape) + " cannot hold " + std::to_string(values.size()) +
                         " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->id = next_node_id.fetch_add(1, std::memory_order_relaxed);
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> values(shape_numel(shape), value);
  return Tensor(new_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(new_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape()));
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->values.size(); }

std::span<const double> Tensor::values() const { return node_->values; }

std::span<double> Tensor::mutable_values() { return node_->values; }

double Tensor::item() const {
  if (numel() != 1) throw UsageError("item() on tensor of shape " + shape_str(shape()));
  return node_->values[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  if (!is_leaf()) throw UsageError("requires_grad can only be changed on leaf tensors");
  node_->requires_grad = flag;
}

bool Tensor::is_leaf() const { return !node_->backward; }

bool Tensor::frozen() const { return node_->frozen; }

void Tensor::set_frozen(bool flag) {
  if (!is_leaf()) throw UsageError("only leaf tensors can be frozen");
  node_->frozen = flag;
  node_->requires_grad = !flag;
  if (flag) clear_grad();
}

bool Tensor::has_grad() const { return node_->has_grad; }

std::span<const double> Tensor::grad() const {
  if (!node_->has_grad) throw UsageError("tensor '" + name() + "' has no gradient");
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!node_->has_grad) throw UsageError("tensor '" + name() + "' has no gradient");
  return node_->grad;
}

void Tensor::zero_grad() {
  node_->grad.assign(numel(), 0.0);
  node_->has_grad = true;
}

void Tensor::clear_grad() {
  node_->grad.clear();
  node_->grad.shrink_to_fit();
  node_->has_grad = false;
}

const std::string& Tensor::name() const { return node_->name; }

void Tensor::set_name(std::string name) { node_->name = std::move(name); }

std::uint64_t Tensor::node_id() const { return node_->id; }

const char* Tensor::op_name() const { return node_->op; }

Tensor Tensor::clone(bool requires_grad) const { return from(shape(), node_->values, requires_grad); }

bool grad_enabled() { return recording; }

NoGradGuard::NoGradGuard() : previous_(recording) { recording = false; }

NoGradGuard::~NoGradGuard() { recording = previous_; }

Tensor make_op_result(const char* op, Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                      detail::BackwardFn backward) {
  const bool needs_grad =
      recording && std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  auto node = new_node(std::move(shape), std::move(values), needs_grad);
  node->op = op;
  if (needs_grad) {
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(in.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw UsageError("backward on an undefined tensor");
  if (loss.numel() != 1) throw UsageError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
  if (!loss.requires_grad()) return;

  // Collect the reachable sub-graph of gradient-tracked nodes.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<detail::Node*> stack{loss.node().get()};
  seen.insert(stack.back());
  while (!stack.empty()) {
    detail::Node* node = stack.back();
    stack.pop_back();
    order.push_back(node);
    for (const auto& in : node->inputs) {
      if (in->requires_grad && seen.insert(in.get()).second) stack.push_back(in.get());
    }
  }
  std::sort(order.begin(), order.end(), [](const detail::Node* a, const detail::Node* b) { return a->id > b->id; });

  std::unordered_map<detail::Node*, std::vector<double>> cotangent;
  cotangent[loss.node().get()] = {1.0};
  std::vector<std::vector<double>*> grad_in;
  for (detail::Node* node : order) {
    auto it = cotangent.find(node);
    if (it == cotangent.end()) continue;
    std::vector<double> g = std::move(it->second);
    cotangent.erase(it);

    if (!node->has_grad) {
      node->grad.assign(node->values.size(), 0.0);
      node->has_grad = true;
    }
    for (std::size_t i = 0; i < g.size(); ++i) node->grad[i] += g[i];

    if (!node->backward) continue;
    grad_in.assign(node->inputs.size(), nullptr);
    for (std::size_t i = 0; i < node->inputs.size(); ++i) {
      detail::Node* in = node->inputs[i].get();
      if (!in->requires_grad) continue;
      auto& buf = cotangent[in];
      if (buf.empty()) buf.assign(in->values.size(), 0.0);
      grad_in[i] = &buf;
    }
    node->backward(g, grad_in);
  }
}

Tensor stop_gradient(const Tensor& x) {
  Tensor out = x.clone(false);
  out.node()->op = "stop_gradient";
  return out;
}

}  // namespace paddles
