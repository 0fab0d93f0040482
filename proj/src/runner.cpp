// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/runner.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "paddles/errors.hpp"
#include "paddles/io.hpp"
#include "paddles/noise.hpp"
#include "paddles/rng.hpp"
#include "paddles/synthetic.hpp"

namespace paddles {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTestStream = 1;
constexpr std::uint64_t kFitStream = 7;

Tensor flatten_rows(const Tensor& x) {
  if (x.rank() <= 2) return x;
  const std::size_t n = x.dim(0);
  return Tensor::from({n, n == 0 ? 0 : x.numel() / n}, std::vector<double>(x.values().begin(), x.values().end()));
}

json metrics_json(const SplitMetrics& m) {
  return {{"test_accuracy", m.test_accuracy},     {"label_recall", m.label_recall},
          {"label_precision", m.label_precision}, {"recall_defined", m.recall_defined},
          {"precision_defined", m.precision_defined}, {"confident_count", m.confident_count},
          {"confident_correct", m.confident_correct}, {"correct_total", m.correct_total}};
}

json last_epoch_json(const RunReport& r) {
  if (r.epochs.empty()) return nullptr;
  const EpochRecord& e = r.epochs.back();
  return {{"epoch", e.epoch},
          {"phase", e.phase},
          {"train_loss", e.train_loss},
          {"acc_clean_subset", e.acc_clean_subset},
          {"acc_noisy_subset", e.acc_noisy_subset},
          {"test_acc", e.test_acc}};
}

void write_json(const fs::path& path, const json& doc) { io::write_file_atomic(path, doc.dump(2) + "\n"); }

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const Error*>(&e)) return "input";
  return "internal";
}

class Log {
 public:
  explicit Log(bool quiet) : quiet_(quiet) {}
  void operator()(const std::string& line) const {
    if (!quiet_) std::cout << line << std::endl;
  }

 private:
  bool quiet_;
};

SplitMetrics confident_metrics(const SegmentedModel& model, const ExperimentData& data, const ExperimentConfig& c,
                               ConfidentSplit* split_out = nullptr) {
  const Augmentation second =
      gaussian_feature_noise(data.train.features, c.selection.augment_noise, resolve_seeds(c).selection);
  ConfidentSplit split = select_confident(model, data.train, identity_augmentation(), second);
  SplitMetrics m = label_metrics(split, data.train.clean_labels, data.train.noisy_labels);
  m.test_accuracy = data.test ? accuracy(model, *data.test) : std::numeric_limits<double>::quiet_NaN();
  if (split_out) *split_out = std::move(split);
  return m;
}

// One PADDLES (or plain) training run with its outputs under `out`.
struct SingleResult {
  RunReport report;
  std::optional<SplitMetrics> metrics;
  json summary;
};

enum class Variant { Paddles, Base, Plain };

SingleResult run_single(const ExperimentConfig& c, const ExperimentData& data, const fs::path& out, Variant variant,
                        const Log& log) {
  SegmentedModel model = build_model(c, data.train);
  PaddlesSchedule schedule = make_schedule(c, model.num_stages());
  if (variant == Variant::Base) schedule.suffix_epochs.clear();
  const LabeledSet* test = data.test ? &*data.test : nullptr;

  SingleResult result;
  if (variant == Variant::Plain) {
    result.report = train_plain(model, data.train, test, schedule.total_epochs(), schedule.phase_optimizer,
                                schedule.batch_size, schedule.seed);
  } else {
    result.report = run_paddles(model, data.train, test, schedule);
  }
  io::write_file_atomic(out / "report.csv", result.report.to_csv());

  json summary = {{"status", "ok"},
                  {"variant", variant == Variant::Paddles ? "paddles" : variant == Variant::Base ? "base" : "plain"},
                  {"schedule", to_json(schedule)},
                  {"seeds", to_json(resolve_seeds(c))},
                  {"epochs_logged", result.report.epochs.size()},
                  {"last_epoch", last_epoch_json(result.report)},
                  {"noise", {{"kind", to_string(data.train.noise_kind)},
                             {"epsilon", data.train.epsilon},
                             {"empirical_rate", noise_report(data.train).disagreement}}}};

  if (c.selection.enabled) {
    ConfidentSplit split;
    const SplitMetrics m = confident_metrics(model, data, c, &split);
    result.metrics = m;
    summary["final"] = metrics_json(m);
    if (c.selection.fit_epochs > 0) {
      if (c.selection.fresh_start) model = build_model(c, data.train);
      if (split.labeled.empty()) throw InputError("confident fit: no confident samples were selected");
      Trainer fit(model, data.train, test, schedule.batch_size, derive_seed(resolve_seeds(c).selection, kFitStream));
      Optimizer opt(c.selection.fit_optimizer);
      weighted_ce_fit(fit, split, c.selection.fit_epochs, opt);
      io::write_file_atomic(out / "fit_report.csv", fit.report().to_csv());
      summary["after_fit"] = {{"test_accuracy", test ? accuracy(model, *test) : std::numeric_limits<double>::quiet_NaN()},
                              {"fresh_start", c.selection.fresh_start},
                              {"epochs", c.selection.fit_epochs}};
    }
  }
  model.save(out, "model");
  result.summary = summary;
  log("  " + out.string() + ": " + std::to_string(result.report.epochs.size()) + " epochs");
  return result;
}

void save_data(const ExperimentConfig& c, const ExperimentData& data, const fs::path& out) {
  if (c.dataset.generator == Generator::File) {
    write_json(out / "dataset_ref.json",
               {{"path", c.dataset.path.string()}, {"test_path", c.dataset.test_path.string()}});
    return;
  }
  save_dataset(out / "dataset", data.train);
  if (data.test) {
    NoisyDataset t;
    t.features = data.test->features;
    t.clean_labels = data.test->labels;
    t.noisy_labels = data.test->labels;
    t.num_classes = data.test->num_classes;
    t.flipped.assign(t.clean_labels.size(), 0);
    save_dataset(out / "test", t);
  }
}

json run_figure1(const ExperimentConfig& c, const ExperimentData& data, const fs::path& out, const Log& log) {
  const LabeledSet* test = data.test ? &*data.test : nullptr;
  const std::vector<std::string> names = {"full", "detach_amplitude", "detach_phase"};
  const std::optional<GateMode> modes[] = {std::nullopt, GateMode::DetachAmplitude, GateMode::DetachPhase};
  std::vector<RunReport> reports;
  for (std::size_t s = 0; s < names.size(); ++s) {
    SegmentedModel model = build_model(c, data.train);
    const PaddlesSchedule schedule = make_schedule(c, model.num_stages());
    model.set_gate_index(schedule.gate_index);
    Trainer trainer(model, data.train, test, schedule.batch_size, schedule.seed);
    Optimizer opt(schedule.phase_optimizer);
    trainer.train_phase(c.study.epochs, modes[s], opt, names[s]);
    reports.push_back(trainer.take_report());
    io::write_file_atomic(out / ("figure1_" + names[s] + ".csv"), reports.back().to_csv());
    log("  figure1 series " + names[s] + ": " + std::to_string(c.study.epochs) + " epochs");
  }
  const FigureData fig = emit_figure_data(reports, names);
  io::write_file_atomic(out / "figure1_long.csv", fig.csv);
  json crossings = json::array();
  for (const Crossing& x : fig.crossings) {
    crossings.push_back({{"first", x.first},
                         {"second", x.second},
                         {"metric", x.metric},
                         {"epoch", x.epoch ? json(*x.epoch) : json("none")}});
  }
  json finals = json::object();
  for (std::size_t s = 0; s < names.size(); ++s) finals[names[s]] = last_epoch_json(reports[s]);
  return {{"status", "ok"}, {"study", "figure1"}, {"seeds", to_json(resolve_seeds(c))},
          {"epochs", c.study.epochs}, {"final", finals}, {"crossings", crossings}};
}

json run_ablation(const ExperimentConfig& c, const ExperimentData& data, const fs::path& out, const Log& log) {
  json variants = json::object();
  for (const std::string& name : c.study.variants) {
    const Variant v = name == "paddles" ? Variant::Paddles : name == "base" ? Variant::Base : Variant::Plain;
    fs::create_directories(out / name);
    SingleResult r = run_single(c, data, out / name, v, log);
    write_json(out / name / "summary.json", r.summary);
    variants[name] = r.metrics ? metrics_json(*r.metrics) : json(nullptr);
  }
  return {{"status", "ok"}, {"study", "ablation"}, {"seeds", to_json(resolve_seeds(c))}, {"variants", variants}};
}

json run_sweep(const ExperimentConfig& c, const ExperimentData& data, const fs::path& out, const Log& log) {
  json entries = json::array();
  std::vector<SplitMetrics> metrics;
  for (std::size_t value : c.study.values) {
    ExperimentConfig point = c;
    point.study.kind = StudyKind::Single;
    if (c.study.parameter == "t_a") point.schedule.t_a = value;
    if (c.study.parameter == "t_p") point.schedule.t_p = value;
    if (c.study.parameter == "t_0") point.schedule.t_0 = value;
    const std::string name = c.study.parameter + "_" + std::to_string(value);
    fs::create_directories(out / name);
    SingleResult r = run_single(point, data, out / name, Variant::Paddles, log);
    write_json(out / name / "summary.json", r.summary);
    metrics.push_back(r.metrics.value_or(SplitMetrics{0.0, 0.0, 0.0, false, false, 0, 0, 0}));
    entries.push_back({{"value", value}, {"dir", name}, {"final", r.summary.value("final", json(nullptr))}});
  }
  const auto best = best_by_precision(metrics);
  return {{"status", "ok"},
          {"study", "sweep"},
          {"parameter", c.study.parameter},
          {"seeds", to_json(resolve_seeds(c))},
          {"runs", entries},
          {"best", best ? json{{"value", c.study.values[*best]}, {"index", *best}} : json(nullptr)}};
}

json replay_document(const ExperimentConfig& c) {
  json cfg = echo(c);
  cfg.erase("output_dir");
  return {{"format", "paddles-replay-v1"}, {"config", cfg}, {"seeds", to_json(resolve_seeds(c))}};
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitIo;
  if (dynamic_cast<const Error*>(&e)) return kExitConfig;
  return kExitFailure;
}

ExperimentData build_data(const ExperimentConfig& c) {
  ExperimentData data;
  const DatasetConfig& d = c.dataset;
  const ResolvedSeeds seeds = resolve_seeds(c);
  if (d.generator == Generator::File) {
    data.train = load_dataset(d.path);
    if (!d.test_path.empty()) data.test = load_dataset(d.test_path).clean_view();
  } else {
    LabeledSet train, test;
    if (d.generator == Generator::Blobs) {
      BlobSpec spec{d.dim, d.num_classes, d.separation, d.spread, seeds.dataset};
      train = gaussian_blobs(spec, d.n, 0);
      if (d.test_n > 0) test = gaussian_blobs(spec, d.test_n, kTestStream);
    } else {
      TinyImageSpec spec{d.height, d.width, d.channels, d.num_classes, d.pixel_noise, d.phase_jitter, seeds.dataset};
      train = tiny_images(spec, d.n, 0);
      if (d.test_n > 0) test = tiny_images(spec, d.test_n, kTestStream);
    }
    data.train = corrupt(train, {c.noise.kind, c.noise.epsilon, seeds.noise});
    if (d.test_n > 0) data.test = std::move(test);
  }
  if (c.model.kind == "mlp") {
    data.train.features = flatten_rows(data.train.features);
    if (data.test) data.test->features = flatten_rows(data.test->features);
  }
  return data;
}

SegmentedModel build_model(const ExperimentConfig& c, const NoisyDataset& data) {
  const std::uint64_t seed = resolve_seeds(c).model;
  const auto k = static_cast<std::size_t>(data.num_classes);
  const Tensor& x = data.features;
  SegmentedModel model = [&] {
    if (c.model.kind == "mlp") {
      std::vector<std::size_t> widths = {x.numel() / std::max<std::size_t>(1, x.dim(0))};
      widths.insert(widths.end(), c.model.hidden.begin(), c.model.hidden.end());
      return SegmentedModel::build_mlp(widths, k, seed);
    }
    if (x.rank() != 4) {
      throw ConfigError("model.kind: smallcnn needs [N x C x H x W] features, got " + shape_str(x.shape()));
    }
    return SegmentedModel::build_smallcnn(c.model.channels, k, x.dim(2), x.dim(3), seed, x.dim(1));
  }();
  model.set_gate_index(c.schedule.gate_index.value_or(model.num_stages() - 2));
  return model;
}

FigureData emit_figure_data(std::span<const RunReport> reports, std::span<const std::string> names) {
  if (reports.empty()) throw InputError("figure data: no reports");
  if (names.size() != reports.size()) throw InputError("figure data: one series name per report required");
  const auto& axis = reports[0].epochs;
  for (std::size_t s = 1; s < reports.size(); ++s) {
    const auto& other = reports[s].epochs;
    bool same = other.size() == axis.size();
    for (std::size_t e = 0; same && e < axis.size(); ++e) same = other[e].epoch == axis[e].epoch;
    if (!same) throw InputError("figure data: series '" + names[s] + "' has a different epoch axis");
  }
  auto value = [](const EpochRecord& r, std::string_view metric) {
    if (metric == "train_loss") return r.train_loss;
    if (metric == "acc_clean_subset") return r.acc_clean_subset;
    if (metric == "acc_noisy_subset") return r.acc_noisy_subset;
    return r.test_acc;
  };

  FigureData fig;
  fig.csv = "epoch,series,metric,value\n";
  for (std::size_t s = 0; s < reports.size(); ++s) {
    for (const EpochRecord& r : reports[s].epochs) {
      for (const char* metric : kFigureMetrics) {
        fig.csv += std::to_string(r.epoch) + "," + names[s] + "," + metric + "," + io::format_double(value(r, metric)) +
                   "\n";
      }
    }
  }
  for (std::size_t a = 0; a < reports.size(); ++a) {
    for (std::size_t b = a + 1; b < reports.size(); ++b) {
      for (const char* metric : {"acc_clean_subset", "acc_noisy_subset"}) {
        Crossing x{names[a], names[b], metric, std::nullopt};
        int last = 0;
        for (std::size_t e = 0; e < axis.size() && !x.epoch; ++e) {
          const double d = value(reports[a].epochs[e], metric) - value(reports[b].epochs[e], metric);
          if (std::isnan(d)) continue;
          const int sign = d > 0 ? 1 : d < 0 ? -1 : 0;
          if (sign != 0 && last != 0 && sign != last) x.epoch = axis[e].epoch;
          if (sign != 0) last = sign;
        }
        fig.crossings.push_back(std::move(x));
      }
    }
  }
  return fig;
}

std::optional<std::size_t> best_by_precision(std::span<const SplitMetrics> metrics) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (!metrics[i].precision_defined) continue;
    if (!best || metrics[i].label_precision > metrics[*best].label_precision) best = i;
  }
  return best;
}

void synthesize_data(const ExperimentConfig& c, const fs::path& out) {
  if (c.dataset.generator == Generator::File) throw ConfigError("dataset.generator: synth-data needs a generator");
  const ExperimentData data = build_data(c);
  save_data(c, data, out);
  const NoiseReport r = noise_report(data.train);
  write_json(out / "noise_report.json", {{"noise", to_string(data.train.noise_kind)},
                                         {"epsilon", data.train.epsilon},
                                         {"empirical_rate", r.disagreement},
                                         {"class_counts", r.class_counts},
                                         {"flip_counts", r.flip_counts},
                                         {"transition", r.transition}});
  write_json(out / "replay.json", replay_document(c));
}

int run_experiment(const ExperimentConfig& c, const fs::path& out, const RunOptions& options) {
  const Log log(options.quiet);
  try {
    fs::create_directories(out);
    fs::remove(out / kQuarantineMarker);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot prepare output directory " << out << ": " << e.what() << "\n";
    return kExitIo;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    log("study " + to_string(c.study.kind) + " -> " + out.string());
    const ExperimentData data = build_data(c);
    save_data(c, data, out);
    write_json(out / "replay.json", replay_document(c));
    json summary;
    switch (c.study.kind) {
      case StudyKind::Single: {
        summary = run_single(c, data, out, Variant::Paddles, log).summary;
        summary["study"] = "single";
        break;
      }
      case StudyKind::Figure1:
        summary = run_figure1(c, data, out, log);
        break;
      case StudyKind::Ablation:
        summary = run_ablation(c, data, out, log);
        break;
      case StudyKind::Sweep:
        summary = run_sweep(c, data, out, log);
        break;
    }
    write_json(out / "summary.json", summary);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(out / "timing.json", {{"wall_time_seconds", secs}});
    return kExitOk;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    std::cerr << "error: " << e.what() << "\n";
    try {
      io::write_file_atomic(out / kQuarantineMarker, std::string(e.what()) + "\n");
      write_json(out / "summary.json", {{"status", "aborted"}, {"error_kind", error_kind(e)}, {"error", e.what()}});
    } catch (const std::exception& inner) {
      std::cerr << "error: could not record the failure: " << inner.what() << "\n";
      return kExitIo;
    }
    return code;
  }
}

int replay(const fs::path& dir, const fs::path& out, const RunOptions& options) {
  const json doc = json::parse(io::read_file(dir / "replay.json"), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || doc.value("format", "") != "paddles-replay-v1" ||
      !doc.contains("config")) {
    throw ConfigError((dir / "replay.json").string() + ": not a replay file");
  }
  return run_experiment(parse_config_json(doc.at("config")), out, options);
}

}  // namespace paddles
