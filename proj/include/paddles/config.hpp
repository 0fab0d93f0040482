// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paddles/dataset.hpp"
#include "paddles/optimizer.hpp"
#include "paddles/trainer.hpp"

namespace paddles {

enum class Generator { Blobs, TinyImages, File };
enum class StudyKind { Single, Figure1, Ablation, Sweep };

std::string to_string(Generator g);
std::string to_string(StudyKind k);
StudyKind study_kind_from_string(const std::string& name);

struct DatasetConfig {
  Generator generator = Generator::TinyImages;
  std::size_t n = 2000;
  std::size_t test_n = 1000;
  int num_classes = 10;
  // blobs
  std::size_t dim = 16;
  double separation = 1.0;
  double spread = 1.0;
  // tiny images
  std::size_t height = 8;
  std::size_t width = 8;
  std::size_t channels = 1;
  double pixel_noise = 0.8;
  double phase_jitter = 0.5;
  // file
  std::filesystem::path path;
  std::filesystem::path test_path;
  std::optional<std::uint64_t> seed;
};

struct NoiseConfig {
  NoiseKind kind = NoiseKind::None;
  double epsilon = 0.0;
  std::optional<std::uint64_t> seed;
};

struct ModelConfig {
  std::string kind = "smallcnn";
  std::vector<std::size_t> hidden = {64, 32};   // mlp
  std::vector<std::size_t> channels = {8, 16};  // smallcnn
  std::optional<std::uint64_t> seed;
};

struct ScheduleConfig {
  std::optional<std::size_t> gate_index;  // default: penultimate boundary
  std::size_t t_a = 15;
  std::size_t t_p = 10;
  std::size_t t_0 = 0;
  std::optional<std::vector<std::size_t>> suffix_epochs;  // default: none
  std::size_t batch_size = 128;
  OptimizerConfig optimizer = OptimizerConfig::sgd(0.05, 0.9, 1e-4);
  OptimizerConfig suffix_optimizer = OptimizerConfig::adam(1e-3);
  std::optional<std::uint64_t> seed;
};

struct SelectionConfig {
  bool enabled = true;
  double augment_noise = 0.05;
  std::size_t fit_epochs = 0;
  bool fresh_start = false;
  OptimizerConfig fit_optimizer = OptimizerConfig::sgd(0.05, 0.9, 1e-4);
  std::optional<std::uint64_t> seed;
};

struct StudyConfig {
  StudyKind kind = StudyKind::Single;
  std::size_t epochs = 60;                 // figure1
  std::string parameter = "t_a";           // sweep
  std::vector<std::size_t> values;         // sweep
  std::vector<std::string> variants = {"paddles", "base", "plain"};  // ablation
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  DatasetConfig dataset;
  NoiseConfig noise;
  ModelConfig model;
  ScheduleConfig schedule;
  SelectionConfig selection;
  StudyConfig study;
};

/// Concrete seeds of a run. Any seed left out of the config derives from
/// the global seed on a fixed stream.
struct ResolvedSeeds {
  std::uint64_t global = 0;
  std::uint64_t dataset = 0;
  std::uint64_t noise = 0;
  std::uint64_t model = 0;
  std::uint64_t schedule = 0;
  std::uint64_t selection = 0;
};

ResolvedSeeds resolve_seeds(const ExperimentConfig& config);

/// Parses and validates a JSON config. Throws ConfigError naming the
/// dotted path of the offending key; unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full config with every default and seed resolved; running the echo
/// reproduces the original run.
nlohmann::json echo(const ExperimentConfig& config);
nlohmann::json to_json(const ResolvedSeeds& seeds);
nlohmann::json to_json(const OptimizerConfig& config);
nlohmann::json to_json(const PaddlesSchedule& schedule);

/// Schedule for the model described by `config`, with resolved seeds.
PaddlesSchedule make_schedule(const ExperimentConfig& config, std::size_t num_stages);

}  // namespace paddles
