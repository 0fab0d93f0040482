// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>

#include "oracles.hpp"
#include "paddles/errors.hpp"
#include "paddles/model.hpp"
#include "paddles/ops.hpp"
#include "paddles/optimizer.hpp"

using namespace paddles;

namespace {

std::vector<std::vector<double>> snapshot(const SegmentedModel& m) {
  std::vector<std::vector<double>> out;
  for (const Tensor& p : m.parameters()) out.emplace_back(p.values().begin(), p.values().end());
  return out;
}

void train_steps(SegmentedModel& m, const Tensor& x, std::span<const int> y, int steps, OptimizerConfig cfg) {
  std::vector<Tensor> params = m.parameters();
  Optimizer opt(cfg);
  for (int i = 0; i < steps; ++i) {
    zero_grads(params);
    backward(cross_entropy(m.forward(x), y));
    opt.step(params);
  }
}

const GateMode kModes[] = {GateMode::PassBoth, GateMode::DetachAmplitude, GateMode::DetachPhase, GateMode::DetachBoth};

}  // namespace

TEST_CASE("mlp shape contract and determinism") {
  SegmentedModel m = SegmentedModel::build_mlp({4, 8}, 3, 1);
  CHECK(m.num_stages() == 2);
  CHECK(m.forward(oracle::random_tensor({2, 4}, 2)).shape() == Shape{2, 3});
  CHECK(snapshot(m) == snapshot(SegmentedModel::build_mlp({4, 8}, 3, 1)));
  CHECK(snapshot(m) != snapshot(SegmentedModel::build_mlp({4, 8}, 3, 2)));
  CHECK_THROWS_AS(SegmentedModel::build_mlp({4, 0}, 3, 1), ConfigError);
  CHECK_THROWS_AS(SegmentedModel::build_mlp({4}, 3, 1), ConfigError);
  CHECK_THROWS_AS(m.forward(oracle::random_tensor({2, 5}, 3)), DimensionError);
}

TEST_CASE("mlp gradients match finite differences") {
  SegmentedModel m = SegmentedModel::build_mlp({5, 7, 6}, 3, 4);
  for (Tensor p : m.parameters())
    for (double& v : p.mutable_values()) v += 0.05;  // non-zero biases
  const Tensor x = oracle::random_tensor({4, 5}, 5);
  const std::vector<int> y{0, 2, 1, 2};
  m.set_gate_enabled(false);
  backward(cross_entropy(m.forward(x), y));
  for (Tensor p : m.parameters()) {
    CAPTURE(p.name());
    auto values = p.mutable_values();
    const std::vector<double> v0(values.begin(), values.end());
    const auto f = oracle::fd_gradient(v0, [&](std::span<const double> s) {
      std::copy(s.begin(), s.end(), values.begin());
      NoGradGuard g;
      const double loss = cross_entropy(m.forward(x), y).item();
      std::copy(v0.begin(), v0.end(), values.begin());
      return loss;
    });
    CHECK(oracle::max_rel_error(p.grad(), f) < 1e-4);
  }
}

TEST_CASE("smallcnn shape contract") {
  SegmentedModel m = SegmentedModel::build_smallcnn({8, 16}, 10, 8, 8, 6);
  CHECK(m.num_stages() == 3);
  CHECK(m.gate_index() == 1);
  CHECK(m.forward(oracle::random_tensor({4, 1, 8, 8}, 7)).shape() == Shape{4, 10});
  CHECK_THROWS_AS(SegmentedModel::build_smallcnn({4, 4, 4, 4}, 10, 4, 4, 1), ConfigError);
  CHECK_THROWS_AS(SegmentedModel::build_smallcnn({4}, 10, 8, 8, 1), ConfigError);
  CHECK_THROWS_AS(SegmentedModel::build_smallcnn({4, 4}, 10, 3, 8, 1), ConfigError);
}

TEST_CASE("gate transparency") {
  SegmentedModel cnn = SegmentedModel::build_smallcnn({4, 6, 5}, 7, 8, 8, 8);
  SegmentedModel mlp = SegmentedModel::build_mlp({6, 9, 5}, 4, 9);
  const Tensor xc = oracle::random_tensor({3, 1, 8, 8}, 10);
  const Tensor xm = oracle::random_tensor({3, 6}, 11);
  for (SegmentedModel* m : {&cnn, &mlp}) {
    const Tensor& x = m == &cnn ? xc : xm;
    for (std::size_t j = 0; j < m->num_stages(); ++j) {
      m->set_gate_index(j);
      m->set_gate_enabled(false);
      const Tensor plain = m->forward(x);
      m->set_gate_enabled(true);
      for (GateMode mode : kModes) {
        m->set_gate_mode(mode);
        CHECK(oracle::max_abs_diff(m->forward(x).values(), plain.values()) < 1e-8);
      }
      CHECK(oracle::max_abs_diff(m->forward_plain(x).values(), plain.values()) == 0.0);
    }
  }
}

TEST_CASE("zero input through an mlp with zero biases gives zero logits") {
  const SegmentedModel m = SegmentedModel::build_mlp({5, 8, 4}, 3, 12);
  const Tensor logits = m.forward(Tensor::zeros({2, 5}));
  for (double v : logits.values()) CHECK(v == 0.0);
}

TEST_CASE("logits agree with a gate-free clone") {
  SegmentedModel m = SegmentedModel::build_smallcnn({4, 6}, 5, 8, 8, 13);
  SegmentedModel c = m.clone();
  c.set_gate_enabled(false);
  const Tensor x = oracle::random_tensor({5, 1, 8, 8}, 14);
  CHECK(oracle::max_abs_diff(m.forward(x).values(), c.forward(x).values()) < 1e-8);
  // The clone owns fresh leaves.
  c.parameters()[0].mutable_values()[0] += 1.0;
  CHECK(m.parameters()[0].at(0) != c.parameters()[0].at(0));
}

TEST_CASE("composing stages by hand equals forward") {
  SegmentedModel m = SegmentedModel::build_smallcnn({4, 6, 5}, 5, 8, 8, 15);
  m.set_gate_enabled(false);
  const Tensor x = oracle::random_tensor({2, 1, 8, 8}, 16);
  Tensor h = x;
  for (std::size_t l = 0; l < m.num_stages(); ++l) h = m.stage_forward(l, h);
  const Tensor y = m.forward(x);
  CHECK(std::equal(h.values().begin(), h.values().end(), y.values().begin(), y.values().end()));

  ForwardTrace trace;
  m.set_gate_enabled(true);
  m.forward(x, &trace);
  CHECK(trace.stage_outputs.size() == m.num_stages());
  CHECK(trace.chi.shape() == trace.chi_prime.shape());
  CHECK(oracle::max_abs_diff(trace.chi.values(), trace.chi_prime.values()) < 1e-9);
}

TEST_CASE("smallcnn stage-0 gradients under a detached amplitude match the held-amplitude oracle") {
  SegmentedModel m = SegmentedModel::build_smallcnn({3, 4}, 4, 8, 8, 17);
  m.set_gate_index(1);
  m.set_gate_mode(GateMode::DetachAmplitude);
  const Tensor x = oracle::random_tensor({3, 1, 8, 8}, 18);
  const std::vector<int> y{0, 3, 1};
  backward(cross_entropy(m.forward(x), y));
  const auto fd = oracle::held_parameter_gradients(m, x, y, oracle::Held::Amplitude);
  const auto params = m.parameters();
  for (std::size_t k = 0; k < 2; ++k) {
    CAPTURE(params[k].name());
    CHECK(oracle::max_rel_error(params[k].grad(), fd[k]) < 1e-4);
  }
}

TEST_CASE("freezing") {
  SegmentedModel m = SegmentedModel::build_mlp({4, 6, 5}, 3, 19);
  const Tensor x = oracle::random_tensor({6, 4}, 20);
  const std::vector<int> y{0, 1, 2, 0, 1, 2};

  m.freeze_prefix(m.num_stages());
  const auto before = snapshot(m);
  train_steps(m, x, y, 10, OptimizerConfig::adam(0.05, 0.01));
  CHECK(snapshot(m) == before);

  m.freeze_prefix(1);
  CHECK(m.stage_frozen(0));
  CHECK_FALSE(m.stage_frozen(1));
  train_steps(m, x, y, 10, OptimizerConfig::sgd(0.1, 0.9, 0.01));
  const auto after = snapshot(m);
  CHECK(after[0] == before[0]);
  CHECK(after[1] == before[1]);
  bool changed = false;
  for (std::size_t k = 2; k < after.size(); ++k) changed = changed || after[k] != before[k];
  CHECK(changed);

  m.unfreeze_all();
  for (std::size_t l = 0; l < m.num_stages(); ++l) CHECK_FALSE(m.stage_frozen(l));
  CHECK_THROWS_AS(m.freeze_prefix(4), UsageError);
  CHECK_THROWS_AS(m.reinit_suffix(3, 1), UsageError);
}

TEST_CASE("suffix re-initialization") {
  SegmentedModel a = SegmentedModel::build_mlp({4, 6, 5}, 3, 21);
  SegmentedModel b = SegmentedModel::build_mlp({4, 6, 5}, 3, 21);
  const Tensor x = oracle::random_tensor({6, 4}, 22);
  const std::vector<int> y{0, 1, 2, 0, 1, 2};
  train_steps(b, x, y, 3, OptimizerConfig::sgd(0.1));
  a.reinit_suffix(1, 99);
  b.reinit_suffix(1, 99);
  const auto sa = snapshot(a), sb = snapshot(b);
  for (std::size_t k = 2; k < sa.size(); ++k) CHECK(sa[k] == sb[k]);
  CHECK(sa[0] != sb[0]);
  CHECK(a.reinit_history().size() == 1);

  // Re-initializing every stage with the build seed reproduces the build.
  SegmentedModel c = SegmentedModel::build_mlp({4, 6, 5}, 3, 21);
  train_steps(c, x, y, 2, OptimizerConfig::sgd(0.1));
  c.reinit_suffix(0, 21);
  CHECK(snapshot(c) == snapshot(SegmentedModel::build_mlp({4, 6, 5}, 3, 21)));
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  SegmentedModel m = SegmentedModel::build_smallcnn({4, 6}, 5, 8, 8, 23);
  m.set_gate_index(0);
  m.set_gate_mode(GateMode::DetachPhase);
  m.reinit_suffix(1, 77);
  const auto dir = std::filesystem::temp_directory_path() / "paddles_test_checkpoint";
  std::filesystem::remove_all(dir);
  m.save(dir);
  const SegmentedModel back = SegmentedModel::load(dir);
  CHECK(snapshot(back) == snapshot(m));
  CHECK(back.gate_index() == 0);
  CHECK(back.gate_mode() == GateMode::DetachPhase);
  CHECK(back.init_seed() == 23);
  REQUIRE(back.reinit_history().size() == 1);
  CHECK(back.reinit_history()[0].seed == 77);
  const Tensor x = oracle::random_tensor({2, 1, 8, 8}, 24);
  CHECK(oracle::max_abs_diff(back.forward(x).values(), m.forward(x).values()) == 0.0);
  std::filesystem::remove_all(dir);
}
