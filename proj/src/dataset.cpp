// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/dataset.hpp"

#include <json.hpp>

#include "paddles/errors.hpp"
#include "paddles/io.hpp"

namespace paddles {

namespace {

void check_labels(const char* what, const Labels& labels, int k) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      throw InputError(std::string(what) + " label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                       " outside [0, " + std::to_string(k) + ")");
    }
  }
}

void check_features(const Tensor& features, std::size_t n) {
  if (!features.defined() || features.rank() < 1 || features.dim(0) != n) {
    throw DimensionError("features " + (features.defined() ? shape_str(features.shape()) : std::string("<none>")) +
                         " do not hold " + std::to_string(n) + " samples");
  }
}

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None:
      return "none";
    case NoiseKind::Symmetric:
      return "symmetric";
    case NoiseKind::Pairflip:
      return "pairflip";
    case NoiseKind::Instance:
      return "instance";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  for (NoiseKind k : {NoiseKind::None, NoiseKind::Symmetric, NoiseKind::Pairflip, NoiseKind::Instance}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown noise kind '" + name + "' (expected none, symmetric, pairflip or instance)");
}

void LabeledSet::validate() const {
  if (num_classes < 1) throw InputError("labeled set needs at least one class");
  check_features(features, labels.size());
  check_labels("", labels, num_classes);
}

void NoisyDataset::validate() const {
  if (num_classes < 1) throw InputError("dataset needs at least one class");
  const std::size_t n = clean_labels.size();
  check_features(features, n);
  if (noisy_labels.size() != n || flipped.size() != n) {
    throw InputError("dataset label arrays disagree in length");
  }
  if (!flip_rate.empty() && flip_rate.size() != n) throw InputError("per-sample flip rates disagree in length");
  check_labels("clean", clean_labels, num_classes);
  check_labels("noisy", noisy_labels, num_classes);
  for (std::size_t i = 0; i < n; ++i) {
    if ((flipped[i] != 0) != (noisy_labels[i] != clean_labels[i])) {
      throw InputError("flipped flag inconsistent with labels at index " + std::to_string(i));
    }
  }
}

void save_dataset(const std::filesystem::path& dir, const NoisyDataset& ds) {
  ds.validate();
  io::save_tensor(dir, "features", ds.features);
  nlohmann::json labels = {
      {"k", ds.num_classes},
      {"noise_kind", to_string(ds.noise_kind)},
      {"epsilon", ds.epsilon},
      {"seed", ds.noise_seed},
      {"clean_labels", ds.clean_labels},
      {"noisy_labels", ds.noisy_labels},
      {"q", ds.flip_rate},
  };
  io::write_file_atomic(dir / "labels.json", labels.dump() + "\n");
}

NoisyDataset load_dataset(const std::filesystem::path& dir) {
  NoisyDataset ds;
  ds.features = io::load_tensor(dir, "features");
  try {
    const auto labels = nlohmann::json::parse(io::read_file(dir / "labels.json"));
    ds.num_classes = labels.at("k").get<int>();
    ds.noise_kind = noise_kind_from_string(labels.at("noise_kind").get<std::string>());
    ds.epsilon = labels.at("epsilon").get<double>();
    ds.noise_seed = labels.at("seed").get<std::uint64_t>();
    ds.clean_labels = labels.at("clean_labels").get<Labels>();
    ds.noisy_labels = labels.at("noisy_labels").get<Labels>();
    ds.flip_rate = labels.at("q").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed " + (dir / "labels.json").string() + ": " + e.what());
  }
  ds.flipped.resize(ds.clean_labels.size());
  for (std::size_t i = 0; i < ds.clean_labels.size() && i < ds.noisy_labels.size(); ++i) {
    ds.flipped[i] = ds.clean_labels[i] != ds.noisy_labels[i] ? 1 : 0;
  }
  ds.validate();
  return ds;
}

}  // namespace paddles
