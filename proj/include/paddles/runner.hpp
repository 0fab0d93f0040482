// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paddles/config.hpp"
#include "paddles/dataset.hpp"
#include "paddles/model.hpp"
#include "paddles/selection.hpp"
#include "paddles/trainer.hpp"

namespace paddles {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };

/// Exit code for an exception thrown by the library.
int exit_code_for(const std::exception& e);

struct ExperimentData {
  NoisyDataset train;
  std::optional<LabeledSet> test;
};

/// Synthesizes (and corrupts) or loads the data a config describes. Image
/// features are flattened when the model is an MLP.
ExperimentData build_data(const ExperimentConfig& config);
SegmentedModel build_model(const ExperimentConfig& config, const NoisyDataset& data);

struct Crossing {
  std::string first;
  std::string second;
  std::string metric;
  std::optional<std::size_t> epoch;  // epoch index of the first sign change
};

struct FigureData {
  std::string csv;  // epoch,series,metric,value
  std::vector<Crossing> crossings;
};

inline constexpr const char* kFigureMetrics[] = {"train_loss", "acc_clean_subset", "acc_noisy_subset", "test_acc"};

/// Long-format curves of several reports sharing one epoch axis, plus the
/// first crossing of every pair of series on the clean- and noisy-subset
/// accuracy curves. A crossing is the first epoch whose difference has the
/// opposite sign of the last non-zero difference before it.
/// Throws InputError when the epoch axes differ or `names` does not match.
FigureData emit_figure_data(std::span<const RunReport> reports, std::span<const std::string> names);

/// Index of the entry with the highest defined label precision; ties go to
/// the lowest index. Returns nullopt when no precision is defined.
std::optional<std::size_t> best_by_precision(std::span<const SplitMetrics> metrics);

struct RunOptions {
  bool quiet = false;
};

/// Writes the train/test snapshot and a noise report under `out`.
void synthesize_data(const ExperimentConfig& config, const std::filesystem::path& out);

/// Runs the config's study into `out`. Any failure leaves a QUARANTINE
/// marker and an aborted summary.json behind. Returns an exit code.
int run_experiment(const ExperimentConfig& config, const std::filesystem::path& out, const RunOptions& options = {});

/// Re-runs the replay.json stored in `dir` into `out`.
int replay(const std::filesystem::path& dir, const std::filesystem::path& out, const RunOptions& options = {});

inline constexpr const char* kQuarantineMarker = "QUARANTINE";

}  // namespace paddles
