// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "paddles/errors.hpp"
#include "paddles/io.hpp"
#include "paddles/ops.hpp"
#include "paddles/rng.hpp"

namespace paddles {

namespace {

constexpr std::size_t kEvalBatch = 512;

double fraction(std::size_t hits, std::size_t total) {
  return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

std::size_t PaddlesSchedule::total_epochs() const {
  return t_a + t_p + t_0 + std::accumulate(suffix_epochs.begin(), suffix_epochs.end(), std::size_t{0});
}

void PaddlesSchedule::validate(const SegmentedModel& model) const {
  if (t_a + t_p + t_0 < 1) throw ConfigError("schedule: T_A + T_P + T_0 must be at least 1");
  if (gate_index >= model.num_stages()) {
    throw ConfigError("schedule: gate index " + std::to_string(gate_index) + " outside the model's " +
                      std::to_string(model.num_stages()) + " stages");
  }
  const std::size_t after = model.num_stages() - 1 - gate_index;
  if (!suffix_epochs.empty() && suffix_epochs.size() != after) {
    throw ConfigError("schedule: " + std::to_string(suffix_epochs.size()) + " suffix budgets for " +
                      std::to_string(after) + " stages after the gate");
  }
  if (batch_size == 0) throw ConfigError("schedule: batch size must be positive");
  phase_optimizer.validate();
  suffix_optimizer.validate();
}

std::size_t RunReport::count_phase(const std::string& prefix) const {
  return static_cast<std::size_t>(std::count_if(epochs.begin(), epochs.end(), [&](const EpochRecord& r) {
    return r.phase.compare(0, prefix.size(), prefix) == 0;
  }));
}

std::string RunReport::to_csv() const {
  std::ostringstream os;
  os << "epoch,phase,train_loss,acc_clean_subset,acc_noisy_subset,test_acc\n";
  for (const EpochRecord& r : epochs) {
    os << r.epoch << ',' << r.phase << ',' << io::format_double(r.train_loss) << ','
       << io::format_double(r.acc_clean_subset) << ',' << io::format_double(r.acc_noisy_subset) << ','
       << io::format_double(r.test_acc) << '\n';
  }
  return os.str();
}

Labels predict(const SegmentedModel& model, const Tensor& features) {
  NoGradGuard no_grad;
  const std::size_t n = features.dim(0);
  const std::size_t k = model.num_classes();
  Labels out(n);
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < n; start += kEvalBatch) {
    const std::size_t stop = std::min(n, start + kEvalBatch);
    rows.resize(stop - start);
    std::iota(rows.begin(), rows.end(), start);
    const Tensor logits = model.forward_plain(gather_rows(features, rows));
    auto z = logits.values();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c)
        if (z[r * k + c] > z[r * k + best]) best = c;
      out[start + r] = static_cast<int>(best);
    }
  }
  return out;
}

double accuracy(const SegmentedModel& model, const LabeledSet& set) {
  if (set.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  const Labels pred = predict(model, set.features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < set.size(); ++i) hits += pred[i] == set.labels[i] ? 1 : 0;
  return fraction(hits, set.size());
}

Trainer::Trainer(SegmentedModel& model, const NoisyDataset& data, const LabeledSet* test, std::size_t batch_size,
                 std::uint64_t seed)
    : model_(model), data_(data), test_(test), batch_size_(batch_size), seed_(seed) {
  if (data.size() == 0) throw InputError("trainer: empty dataset");
  if (batch_size == 0) throw ConfigError("trainer: batch size must be positive");
  data.validate();
  if (static_cast<std::size_t>(data.num_classes) != model.num_classes()) {
    throw ConfigError("trainer: dataset has " + std::to_string(data.num_classes) + " classes, model predicts " +
                      std::to_string(model.num_classes()));
  }
}

void Trainer::train_phase(std::size_t epochs, std::optional<GateMode> gate, Optimizer& optimizer,
                          const std::string& tag) {
  std::vector<std::size_t> all(data_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  train_subset(epochs, all, data_.noisy_labels, std::nullopt, gate, optimizer, tag);
}

void Trainer::train_subset(std::size_t epochs, std::span<const std::size_t> samples, std::span<const int> labels,
                           std::optional<std::span<const double>> class_weights, std::optional<GateMode> gate,
                           Optimizer& optimizer, const std::string& tag) {
  if (samples.empty()) throw InputError("trainer: no samples to train on");
  if (labels.size() != samples.size()) throw InputError("trainer: one label per sample required");
  model_.set_gate_enabled(gate.has_value());
  if (gate) model_.set_gate_mode(*gate);

  std::vector<Tensor> params = model_.parameters();
  std::vector<std::size_t> rows;
  std::vector<int> batch_labels;
  for (std::size_t e = 0; e < epochs; ++e) {
    const auto order = Rng(seed_).split(epoch_).permutation(samples.size());
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size_) {
      const std::size_t stop = std::min(order.size(), start + batch_size_);
      rows.clear();
      batch_labels.clear();
      for (std::size_t p = start; p < stop; ++p) {
        rows.push_back(samples[order[p]]);
        batch_labels.push_back(labels[order[p]]);
      }
      zero_grads(params);
      const Tensor logits = model_.forward(gather_rows(data_.features, rows));
      const Tensor loss = cross_entropy(logits, batch_labels, class_weights);
      if (!std::isfinite(loss.item())) {
        throw NumericalError("non-finite training loss in epoch " + std::to_string(epoch_) + " (" + tag + ")");
      }
      backward(loss);
      optimizer.step(params);
      loss_sum += loss.item() * static_cast<double>(rows.size());
    }
    report_.epochs.push_back(measure(tag, loss_sum / static_cast<double>(samples.size())));
    ++epoch_;
  }
}

EpochRecord Trainer::measure(const std::string& tag, double train_loss) const {
  EpochRecord r;
  r.epoch = epoch_;
  r.phase = tag;
  r.train_loss = train_loss;
  const Labels pred = predict(model_, data_.features);
  std::size_t clean_hits = 0, clean_total = 0, noisy_hits = 0, noisy_total = 0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_.flipped[i]) {
      ++noisy_total;
      noisy_hits += pred[i] == data_.noisy_labels[i] ? 1 : 0;
    } else {
      ++clean_total;
      clean_hits += pred[i] == data_.clean_labels[i] ? 1 : 0;
    }
  }
  r.acc_clean_subset = fraction(clean_hits, clean_total);
  r.acc_noisy_subset = fraction(noisy_hits, noisy_total);
  r.test_acc = test_ ? accuracy(model_, *test_) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

void pes_suffix(Trainer& trainer, std::span<const std::size_t> suffix_epochs, const OptimizerConfig& optimizer,
                std::uint64_t reinit_seed) {
  SegmentedModel& model = trainer.model();
  const std::size_t j = model.gate_index();
  const std::size_t last = model.num_stages() - 1;
  if (suffix_epochs.size() != last - j) {
    throw ConfigError("progressive stage: " + std::to_string(suffix_epochs.size()) + " budgets for " +
                      std::to_string(last - j) + " stages after the gate");
  }
  if (suffix_epochs.empty()) return;
  model.reinit_suffix(j + 1, reinit_seed);
  for (std::size_t l = j + 1; l <= last; ++l) {
    model.freeze_prefix(l);
    Optimizer opt(optimizer);
    trainer.train_phase(suffix_epochs[l - j - 1], GateMode::PassBoth, opt,
                        std::string(kPhaseProgressive) + "_" + std::to_string(l));
  }
  model.unfreeze_all();
}

RunReport run_paddles(SegmentedModel& model, const NoisyDataset& data, const LabeledSet* test,
                      const PaddlesSchedule& schedule) {
  schedule.validate(model);
  model.set_gate_index(schedule.gate_index);
  Trainer trainer(model, data, test, schedule.batch_size, schedule.seed);
  trainer.report().schedule = schedule;

  Optimizer sgd(schedule.phase_optimizer);
  trainer.train_phase(schedule.t_a, std::nullopt, sgd, kPhaseFull);
  trainer.train_phase(schedule.t_p, GateMode::DetachAmplitude, sgd, kPhaseDetachAmplitude);
  trainer.train_phase(schedule.t_0, GateMode::DetachPhase, sgd, kPhaseDetachPhase);

  model.set_gate_enabled(true);
  model.set_gate_mode(GateMode::PassBoth);
  if (!schedule.suffix_epochs.empty()) {
    pes_suffix(trainer, schedule.suffix_epochs, schedule.suffix_optimizer,
               derive_seed(schedule.seed, kReinitStream));
  }
  return trainer.take_report();
}

RunReport train_plain(SegmentedModel& model, const NoisyDataset& data, const LabeledSet* test, std::size_t epochs,
                      const OptimizerConfig& optimizer, std::size_t batch_size, std::uint64_t seed) {
  Trainer trainer(model, data, test, batch_size, seed);
  Optimizer opt(optimizer);
  trainer.train_phase(epochs, std::nullopt, opt, kPhaseFull);
  return trainer.take_report();
}

std::vector<double> confident_class_weights(const ConfidentSplit& split, std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int y : split.labeled_labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw InputError("confident split label " + std::to_string(y) + " outside [0, " + std::to_string(num_classes) +
                       ")");
    }
    ++counts[static_cast<std::size_t>(y)];
  }
  const auto total = static_cast<double>(split.labeled.size());
  std::vector<double> weights(num_classes, 0.0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts[c] > 0) weights[c] = total / (static_cast<double>(num_classes) * static_cast<double>(counts[c]));
  }
  return weights;
}

void weighted_ce_fit(Trainer& trainer, const ConfidentSplit& split, std::size_t epochs, Optimizer& optimizer) {
  if (split.labeled.empty()) throw InputError("weighted_ce_fit: the confident set is empty");
  const auto weights = confident_class_weights(split, trainer.model().num_classes());
  trainer.train_subset(epochs, split.labeled, split.labeled_labels, std::span<const double>(weights), std::nullopt,
                       optimizer, kPhaseConfidentFit);
}

void weighted_ce_fit(SegmentedModel& model, const NoisyDataset& data, const ConfidentSplit& split, std::size_t epochs,
                     const OptimizerConfig& optimizer, std::size_t batch_size, std::uint64_t seed) {
  Trainer trainer(model, data, nullptr, batch_size, seed);
  Optimizer opt(optimizer);
  weighted_ce_fit(trainer, split, epochs, opt);
}

}  // namespace paddles
