// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "paddles/spectral.hpp"
#include "paddles/tensor.hpp"

namespace paddles {

enum class StageKind { DenseRelu, ConvRelu, Head };

std::string to_string(StageKind kind);

/// One segment f_l of the model.
struct Stage {
  StageKind kind = StageKind::DenseRelu;
  Tensor weight;               // dense: [in x out]; conv: [F x C x 3 x 3]
  Tensor bias;                 // [out] / [F]
  bool pool_after = false;     // conv stages: 2x2 average pooling after ReLU
  bool flatten_before = false; // head fed by a spatial map
  std::size_t fan_in = 0;
};

struct Architecture {
  std::string kind;                 // "mlp" or "smallcnn"
  std::vector<std::size_t> widths;  // mlp: input dim followed by hidden widths
  std::vector<std::size_t> channels;  // smallcnn: filters per conv stage
  std::size_t in_channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t num_classes = 0;
};

/// Intermediate values of one forward pass.
struct ForwardTrace {
  std::vector<Tensor> stage_outputs;
  Tensor chi;        // feature entering the gate
  Tensor chi_prime;  // feature leaving it
};

/// A classifier f = f_T o ... o f_0 with a spectral gate after stage j.
///
/// Parameters are initialized Kaiming-uniform (bound sqrt(6 / fan_in)) with
/// zero biases; stage l draws from Rng(seed).split(l), so building with a
/// seed and re-initializing every stage with the same seed agree exactly.
class SegmentedModel {
 public:
  /// Dense+ReLU stages widths[0]->widths[1]->...->widths.back(), then a
  /// linear head to K logits. The gate runs 1-D over the feature axis.
  static SegmentedModel build_mlp(std::vector<std::size_t> widths, std::size_t num_classes, std::uint64_t seed);

  /// conv3x3(pad 1)+ReLU stages with 2x2 average pooling between them, then
  /// flatten and a linear head. The gate runs 2-D over the spatial axes.
  static SegmentedModel build_smallcnn(std::vector<std::size_t> channels, std::size_t num_classes,
                                       std::size_t height, std::size_t width, std::uint64_t seed,
                                       std::size_t in_channels = 1);

  std::size_t num_stages() const { return stages_.size(); }
  const Stage& stage(std::size_t l) const { return stages_.at(l); }
  const Architecture& architecture() const { return arch_; }
  std::size_t num_classes() const { return arch_.num_classes; }
  /// Per-sample input shape ([d] or [C x H x W]).
  Shape input_shape() const;

  std::size_t gate_index() const { return gate_index_; }
  void set_gate_index(std::size_t j);
  GateMode gate_mode() const { return gate_mode_; }
  void set_gate_mode(GateMode mode) { gate_mode_ = mode; }
  /// With the gate disabled, stage j feeds stage j+1 directly.
  bool gate_enabled() const { return gate_enabled_; }
  void set_gate_enabled(bool enabled) { gate_enabled_ = enabled; }

  Tensor forward(const Tensor& x, ForwardTrace* trace = nullptr) const;
  /// Forward pass with the gate bypassed regardless of gate_enabled().
  Tensor forward_plain(const Tensor& x) const;
  Tensor stage_forward(std::size_t l, const Tensor& x) const;

  /// Weights and biases in stage order.
  std::vector<Tensor> parameters() const;
  std::vector<Tensor> stage_parameters(std::size_t l) const;
  std::size_t parameter_count() const;

  /// Freezes stages [0, end) and unfreezes the rest.
  void freeze_prefix(std::size_t end);
  void unfreeze_all() { freeze_prefix(0); }
  bool stage_frozen(std::size_t l) const;

  /// Resamples stages [from, T] from the init distribution under `seed`.
  void reinit_suffix(std::size_t from, std::uint64_t seed);

  std::uint64_t init_seed() const { return init_seed_; }
  struct Reinit {
    std::size_t from;
    std::uint64_t seed;
  };
  const std::vector<Reinit>& reinit_history() const { return reinits_; }

  /// Deep copy with fresh parameter leaves.
  SegmentedModel clone() const;

  /// Checkpoint: `<stem>.json` manifest plus `<stem>.bin` parameter blob
  /// (little-endian float64, stage order, weight before bias).
  void save(const std::filesystem::path& dir, const std::string& stem = "model") const;
  static SegmentedModel load(const std::filesystem::path& dir, const std::string& stem = "model");

 private:
  SegmentedModel() = default;
  void init_stage(std::size_t l, std::uint64_t seed);
  void check_input(const Tensor& x) const;

  Architecture arch_;
  std::vector<Stage> stages_;
  std::size_t gate_index_ = 0;
  GateMode gate_mode_ = GateMode::PassBoth;
  bool gate_enabled_ = true;
  std::uint64_t init_seed_ = 0;
  std::vector<Reinit> reinits_;
};

}  // namespace paddles
