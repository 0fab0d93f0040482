// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "paddles/tensor.hpp"

namespace paddles {

enum class OptimizerKind { Sgd, Adam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Sgd;
  double learning_rate = 0.1;
  double momentum = 0.0;       // SGD only
  double weight_decay = 0.0;   // L2 term added to the gradient
  double beta1 = 0.9;          // Adam only
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static OptimizerConfig sgd(double lr, double momentum = 0.0, double weight_decay = 0.0);
  static OptimizerConfig adam(double lr, double weight_decay = 0.0);
  void validate() const;
};

/// Optimizer with per-parameter state (momentum buffer, or Adam moments),
/// keyed by parameter node. Update rules:
///   SGD:  v <- mu*v + g + lambda*theta;  theta <- theta - lr*v
///   Adam: g' = g + lambda*theta; bias-corrected first/second moments;
///         theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  /// One update of every non-frozen parameter, then zeroes their gradients.
  /// Throws UsageError naming the first trainable parameter lacking a grad.
  void step(std::span<Tensor> params);

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t steps_taken() const { return steps_; }

 private:
  struct Slots {
    std::vector<double> first;
    std::vector<double> second;
  };

  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  std::unordered_map<std::uint64_t, Slots> slots_;
};

inline void opt_step(std::span<Tensor> params, Optimizer& state) { state.step(params); }

/// Gives every non-frozen parameter a zero-filled gradient buffer.
void zero_grads(std::span<Tensor> params);

}  // namespace paddles
