// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paddles/dataset.hpp"
#include "paddles/model.hpp"
#include "paddles/optimizer.hpp"
#include "paddles/selection.hpp"

namespace paddles {

/// Staged training plan.
///   phase 1: t_a epochs of ordinary training (gate bypassed)
///   phase 2: t_p epochs with the amplitude spectrum detached
///   phase 3: t_0 epochs with the phase spectrum detached
///   phase 4: progressive training of stages j+1..T, suffix_epochs[i] epochs
///            for stage j+1+i, earlier stages frozen
/// Phases 1-3 share one optimizer (`phase_optimizer`); every stage of
/// phase 4 gets a fresh `suffix_optimizer`. An empty suffix_epochs skips
/// phase 4 entirely.
struct PaddlesSchedule {
  std::size_t gate_index = 0;
  std::size_t t_a = 0;
  std::size_t t_p = 0;
  std::size_t t_0 = 0;
  std::vector<std::size_t> suffix_epochs;
  OptimizerConfig phase_optimizer = OptimizerConfig::sgd(0.1, 0.9, 1e-4);
  OptimizerConfig suffix_optimizer = OptimizerConfig::adam(1e-4);
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;

  std::size_t total_epochs() const;
  /// Throws ConfigError when the schedule cannot run on `model`.
  void validate(const SegmentedModel& model) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::string phase;
  double train_loss = 0.0;
  double acc_clean_subset = 0.0;  // vs clean labels, samples whose label was kept
  double acc_noisy_subset = 0.0;  // vs noisy labels, samples whose label was flipped
  double test_acc = 0.0;
};

struct RunReport {
  std::vector<EpochRecord> epochs;
  std::optional<PaddlesSchedule> schedule;
  std::optional<SplitMetrics> final_metrics;

  std::size_t count_phase(const std::string& prefix) const;
  /// Columns: epoch, phase, train_loss, acc_clean_subset, acc_noisy_subset, test_acc.
  std::string to_csv() const;
};

inline constexpr const char* kPhaseFull = "full";
inline constexpr const char* kPhaseDetachAmplitude = "detach_amplitude";
inline constexpr const char* kPhaseDetachPhase = "detach_phase";
inline constexpr const char* kPhaseProgressive = "progressive";  // suffixed with the stage index
inline constexpr const char* kPhaseConfidentFit = "confident_fit";

/// Mini-batch training of one model on one dataset with a shared epoch
/// counter. Epoch e visits samples in the order Rng(seed).split(e).permutation;
/// a final partial batch is kept. After each epoch a RunReport row is
/// appended (metrics use a gate-free forward pass).
class Trainer {
 public:
  Trainer(SegmentedModel& model, const NoisyDataset& data, const LabeledSet* test, std::size_t batch_size,
          std::uint64_t seed);

  /// `gate` = nullopt bypasses the spectral gate entirely.
  void train_phase(std::size_t epochs, std::optional<GateMode> gate, Optimizer& optimizer, const std::string& tag);

  /// Trains on the listed samples with the given labels and optional
  /// per-class loss weights.
  void train_subset(std::size_t epochs, std::span<const std::size_t> samples, std::span<const int> labels,
                    std::optional<std::span<const double>> class_weights, std::optional<GateMode> gate,
                    Optimizer& optimizer, const std::string& tag);

  SegmentedModel& model() { return model_; }
  const NoisyDataset& data() const { return data_; }
  std::size_t epochs_done() const { return epoch_; }
  std::size_t batch_size() const { return batch_size_; }
  std::uint64_t seed() const { return seed_; }
  RunReport& report() { return report_; }
  RunReport take_report() { return std::move(report_); }

 private:
  EpochRecord measure(const std::string& tag, double train_loss) const;

  SegmentedModel& model_;
  const NoisyDataset& data_;
  const LabeledSet* test_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  RunReport report_;
};

/// Classification accuracy of `model` on `set`, gate-free forward pass.
double accuracy(const SegmentedModel& model, const LabeledSet& set);
/// Argmax predictions (ties -> lowest class index).
Labels predict(const SegmentedModel& model, const Tensor& features);

/// Progressive stage on an already-trained model: re-attach both spectra,
/// re-initialize stages j+1..T once under `reinit_seed`, then for each
/// l = j+1..T freeze stages [0, l) and train suffix_epochs[l-j-1] epochs with
/// a fresh optimizer. All stages are unfrozen afterwards.
void pes_suffix(Trainer& trainer, std::span<const std::size_t> suffix_epochs, const OptimizerConfig& optimizer,
                std::uint64_t reinit_seed);

/// Stream of the schedule seed used for phase-4 re-initialization.
inline constexpr std::uint64_t kReinitStream = 0x5e1f;

RunReport run_paddles(SegmentedModel& model, const NoisyDataset& data, const LabeledSet* test,
                      const PaddlesSchedule& schedule);

/// Ordinary training for `epochs` with the gate bypassed.
RunReport train_plain(SegmentedModel& model, const NoisyDataset& data, const LabeledSet* test, std::size_t epochs,
                      const OptimizerConfig& optimizer, std::size_t batch_size, std::uint64_t seed);

/// Class weights |D_lb| / (K * n_c) over the confident set; classes absent
/// from it get weight 0.
std::vector<double> confident_class_weights(const ConfidentSplit& split, std::size_t num_classes);

/// Trains on D_lb (with the retained noisy labels) under the class-weighted
/// cross-entropy. Throws InputError when D_lb is empty.
void weighted_ce_fit(Trainer& trainer, const ConfidentSplit& split, std::size_t epochs, Optimizer& optimizer);
void weighted_ce_fit(SegmentedModel& model, const NoisyDataset& data, const ConfidentSplit& split, std::size_t epochs,
                     const OptimizerConfig& optimizer, std::size_t batch_size, std::uint64_t seed);

}  // namespace paddles
