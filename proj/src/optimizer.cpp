// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "paddles/errors.hpp"

namespace paddles {

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

OptimizerConfig OptimizerConfig::sgd(double lr, double momentum, double weight_decay) {
  OptimizerConfig c;
  c.kind = OptimizerKind::Sgd;
  c.learning_rate = lr;
  c.momentum = momentum;
  c.weight_decay = weight_decay;
  return c;
}

OptimizerConfig OptimizerConfig::adam(double lr, double weight_decay) {
  OptimizerConfig c;
  c.kind = OptimizerKind::Adam;
  c.learning_rate = lr;
  c.weight_decay = weight_decay;
  return c;
}

void OptimizerConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw ConfigError("weight decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) { config_.validate(); }

void Optimizer::step(std::span<Tensor> params) {
  for (const Tensor& p : params) {
    if (!p.frozen() && !p.has_grad()) {
      throw UsageError("opt_step: parameter '" + p.name() + "' has no gradient");
    }
  }
  ++steps_;
  const double lr = config_.learning_rate;
  const double wd = config_.weight_decay;
  for (Tensor& p : params) {
    if (p.frozen()) continue;
    auto theta = p.mutable_values();
    auto g = p.mutable_grad();
    Slots& s = slots_[p.node_id()];
    if (s.first.size() != theta.size()) s.first.assign(theta.size(), 0.0);

    if (config_.kind == OptimizerKind::Sgd) {
      const double mu = config_.momentum;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        s.first[i] = mu * s.first[i] + g[i] + wd * theta[i];
        theta[i] = theta[i] - lr * s.first[i];
      }
    } else {
      if (s.second.size() != theta.size()) s.second.assign(theta.size(), 0.0);
      const double b1 = config_.beta1, b2 = config_.beta2;
      const double t = static_cast<double>(steps_);
      const double c1 = 1.0 - std::pow(b1, t);
      const double c2 = 1.0 - std::pow(b2, t);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double gi = g[i] + wd * theta[i];
        s.first[i] = b1 * s.first[i] + (1.0 - b1) * gi;
        s.second[i] = b2 * s.second[i] + (1.0 - b2) * gi * gi;
        const double m_hat = s.first[i] / c1;
        const double v_hat = s.second[i] / c2;
        theta[i] = theta[i] - lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
      }
    }
    std::fill(g.begin(), g.end(), 0.0);
  }
}

void zero_grads(std::span<Tensor> params) {
  for (Tensor& p : params)
    if (!p.frozen()) p.zero_grad();
}

}  // namespace paddles
