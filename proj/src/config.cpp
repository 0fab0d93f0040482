// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/config.hpp"

#include <cmath>
#include <set>

#include "paddles/errors.hpp"
#include "paddles/io.hpp"
#include "paddles/rng.hpp"

namespace paddles {

using nlohmann::json;

namespace {

// Streams of the global seed for seeds the config leaves out.
constexpr std::uint64_t kDatasetStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kModelStream = 3;
constexpr std::uint64_t kScheduleStream = 4;
constexpr std::uint64_t kSelectionStream = 5;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(path(key), "expected a non-negative integer");
  }

  std::optional<std::uint64_t> seed(const std::string& key) {
    if (!has(key) || node_.at(key).is_null()) {
      if (has(key)) seen_.insert(key);
      return std::nullopt;
    }
    return u64(key, 0);
  }

  std::size_t size(const std::string& key, std::size_t fallback, std::size_t min = 0) {
    const std::uint64_t v = u64(key, fallback);
    if (v < min) fail(path(key), "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path(key), "must be finite");
    return d;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<std::size_t> sizes(const std::string& key, std::vector<std::size_t> fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_array()) fail(path(key), "expected an array of non-negative integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_unsigned() && !(v[i].is_number_integer() && v[i].get<std::int64_t>() >= 0)) {
        fail(path(key) + "[" + std::to_string(i) + "]", "expected a non-negative integer");
      }
      out.push_back(v[i].get<std::size_t>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_array()) fail(path(key), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(path(key) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  Reader child(const std::string& key) {
    static const json empty = json::object();
    if (!has(key)) return Reader(empty, path(key));
    return Reader(raw(key), path(key));
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) fail(path(item.key()), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

OptimizerConfig read_optimizer(Reader r, const OptimizerConfig& fallback) {
  OptimizerConfig c = fallback;
  if (r.has("kind")) {
    const std::string kind = r.text("kind", "");
    try {
      c.kind = optimizer_kind_from_string(kind);
    } catch (const Error&) {
      fail(r.path("kind"), "unknown optimizer '" + kind + "' (expected sgd or adam)");
    }
  }
  c.learning_rate = r.number("learning_rate", c.learning_rate);
  c.momentum = r.number("momentum", c.momentum);
  c.weight_decay = r.number("weight_decay", c.weight_decay);
  c.beta1 = r.number("beta1", c.beta1);
  c.beta2 = r.number("beta2", c.beta2);
  c.epsilon = r.number("epsilon", c.epsilon);
  r.finish();
  if (!(c.learning_rate > 0.0)) fail(r.path("learning_rate"), "must be positive");
  if (c.momentum < 0.0 || c.momentum >= 1.0) fail(r.path("momentum"), "must lie in [0, 1)");
  if (c.weight_decay < 0.0) fail(r.path("weight_decay"), "must be non-negative");
  if (c.beta1 < 0.0 || c.beta1 >= 1.0) fail(r.path("beta1"), "must lie in [0, 1)");
  if (c.beta2 < 0.0 || c.beta2 >= 1.0) fail(r.path("beta2"), "must lie in [0, 1)");
  if (!(c.epsilon > 0.0)) fail(r.path("epsilon"), "must be positive");
  return c;
}

std::size_t stage_count(const ModelConfig& m) {
  return (m.kind == "mlp" ? m.hidden.size() : m.channels.size()) + 1;
}

void read_dataset(Reader r, DatasetConfig& d) {
  const std::string gen = r.text("generator", "tiny_images");
  if (gen == "blobs") {
    d.generator = Generator::Blobs;
  } else if (gen == "tiny_images") {
    d.generator = Generator::TinyImages;
  } else if (gen == "file") {
    d.generator = Generator::File;
  } else {
    fail(r.path("generator"), "unknown generator '" + gen + "' (expected blobs, tiny_images or file)");
  }
  if (d.generator == Generator::File) {
    if (!r.has("path")) fail(r.path("path"), "required for a file dataset");
    d.path = r.text("path", "");
    d.test_path = r.text("test_path", "");
    r.finish();
    return;
  }
  d.n = r.size("n", d.n, 1);
  d.test_n = r.size("test_n", d.test_n);
  const std::size_t k = r.size("num_classes", static_cast<std::size_t>(d.num_classes), 2);
  if (k > 1000000) fail(r.path("num_classes"), "too many classes");
  d.num_classes = static_cast<int>(k);
  d.seed = r.seed("seed");
  if (d.generator == Generator::Blobs) {
    d.dim = r.size("dim", d.dim, 1);
    d.separation = r.number("separation", d.separation);
    d.spread = r.number("spread", d.spread);
    if (d.separation < 0.0) fail(r.path("separation"), "must be non-negative");
    if (!(d.spread > 0.0)) fail(r.path("spread"), "must be positive");
  } else {
    d.height = r.size("height", d.height, 1);
    d.width = r.size("width", d.width, 1);
    d.channels = r.size("channels", d.channels, 1);
    d.pixel_noise = r.number("pixel_noise", d.pixel_noise);
    d.phase_jitter = r.number("phase_jitter", d.phase_jitter);
    if (d.pixel_noise < 0.0) fail(r.path("pixel_noise"), "must be non-negative");
    if (d.phase_jitter < 0.0) fail(r.path("phase_jitter"), "must be non-negative");
  }
  r.finish();
}

void read_noise(Reader r, NoiseConfig& n, Generator generator) {
  const std::string kind = r.text("kind", "none");
  try {
    n.kind = noise_kind_from_string(kind);
  } catch (const Error&) {
    fail(r.path("kind"), "unknown noise kind '" + kind + "' (expected none, symmetric, pairflip or instance)");
  }
  n.epsilon = r.number("epsilon", n.epsilon);
  n.seed = r.seed("seed");
  r.finish();
  if (n.epsilon < 0.0 || n.epsilon > 1.0) fail(r.path("epsilon"), "must lie in [0, 1]");
  if (n.kind == NoiseKind::Pairflip && n.epsilon > 0.5) {
    fail(r.path("epsilon"), "pairflip noise above 0.5 is not identifiable");
  }
  if (n.kind == NoiseKind::None && n.epsilon != 0.0) fail(r.path("epsilon"), "must be 0 without a noise kind");
  if (generator == Generator::File && n.kind != NoiseKind::None) {
    fail(r.path("kind"), "a file dataset already carries its noisy labels");
  }
}

void read_model(Reader r, ModelConfig& m, const DatasetConfig& d) {
  m.kind = r.text("kind", m.kind);
  if (m.kind == "mlp") {
    m.hidden = r.sizes("hidden", m.hidden);
    if (m.hidden.empty()) fail(r.path("hidden"), "need at least one hidden width");
    for (std::size_t i = 0; i < m.hidden.size(); ++i)
      if (m.hidden[i] == 0) fail(r.path("hidden") + "[" + std::to_string(i) + "]", "width must be positive");
  } else if (m.kind == "smallcnn") {
    m.channels = r.sizes("channels", m.channels);
    if (m.channels.size() < 2 || m.channels.size() > 4) fail(r.path("channels"), "need 2 to 4 conv stages");
    for (std::size_t i = 0; i < m.channels.size(); ++i)
      if (m.channels[i] == 0) fail(r.path("channels") + "[" + std::to_string(i) + "]", "must be positive");
    if (d.generator == Generator::Blobs) fail(r.path("kind"), "smallcnn needs a tiny_images or file dataset");
    if (d.generator == Generator::TinyImages && (d.height < 4 || d.width < 4)) {
      fail(r.path("kind"), "smallcnn needs images of at least 4x4");
    }
  } else {
    fail(r.path("kind"), "unknown model '" + m.kind + "' (expected mlp or smallcnn)");
  }
  m.seed = r.seed("seed");
  r.finish();
}

void read_schedule(Reader r, ScheduleConfig& s, std::size_t stages) {
  if (r.has("gate_index") && !r.raw("gate_index").is_null()) s.gate_index = r.size("gate_index", 0);
  s.t_a = r.size("t_a", s.t_a);
  s.t_p = r.size("t_p", s.t_p);
  s.t_0 = r.size("t_0", s.t_0);
  if (r.has("suffix_epochs")) s.suffix_epochs = r.sizes("suffix_epochs", {});
  s.batch_size = r.size("batch_size", s.batch_size, 1);
  s.optimizer = read_optimizer(r.child("optimizer"), s.optimizer);
  s.suffix_optimizer = read_optimizer(r.child("suffix_optimizer"), s.suffix_optimizer);
  s.seed = r.seed("seed");
  r.finish();
  if (s.t_a + s.t_p + s.t_0 < 1) fail(r.path("t_a"), "t_a + t_p + t_0 must be at least 1");
  const std::size_t j = s.gate_index.value_or(stages - 2);
  if (j >= stages) {
    fail(r.path("gate_index"), "must be below " + std::to_string(stages) + ", the model's stage count");
  }
  if (s.suffix_epochs && !s.suffix_epochs->empty() && s.suffix_epochs->size() != stages - 1 - j) {
    fail(r.path("suffix_epochs"), "expected " + std::to_string(stages - 1 - j) + " entries, one per stage after the gate");
  }
}

void read_selection(Reader r, SelectionConfig& s) {
  s.enabled = r.flag("enabled", s.enabled);
  s.augment_noise = r.number("augment_noise", s.augment_noise);
  s.fit_epochs = r.size("fit_epochs", s.fit_epochs);
  s.fresh_start = r.flag("fresh_start", s.fresh_start);
  s.fit_optimizer = read_optimizer(r.child("fit_optimizer"), s.fit_optimizer);
  s.seed = r.seed("seed");
  r.finish();
  if (s.augment_noise < 0.0) fail(r.path("augment_noise"), "must be non-negative");
  if (s.fit_epochs > 0 && !s.enabled) fail(r.path("fit_epochs"), "needs selection enabled");
}

void read_study(Reader r, StudyConfig& s) {
  const std::string kind = r.text("kind", "single");
  try {
    s.kind = study_kind_from_string(kind);
  } catch (const Error&) {
    fail(r.path("kind"), "unknown study '" + kind + "' (expected single, figure1, ablation or sweep)");
  }
  if (s.kind == StudyKind::Figure1) s.epochs = r.size("epochs", s.epochs, 1);
  if (s.kind == StudyKind::Sweep) {
    s.parameter = r.text("parameter", s.parameter);
    if (s.parameter != "t_a" && s.parameter != "t_p" && s.parameter != "t_0") {
      fail(r.path("parameter"), "expected t_a, t_p or t_0");
    }
    if (!r.has("values")) fail(r.path("values"), "required for a sweep");
    s.values = r.sizes("values", {});
    if (s.values.empty()) fail(r.path("values"), "must not be empty");
  }
  if (s.kind == StudyKind::Ablation) {
    s.variants = r.strings("variants", s.variants);
    if (s.variants.empty()) fail(r.path("variants"), "must not be empty");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < s.variants.size(); ++i) {
      const std::string& v = s.variants[i];
      const std::string p = r.path("variants") + "[" + std::to_string(i) + "]";
      if (v != "paddles" && v != "base" && v != "plain") fail(p, "unknown variant '" + v + "'");
      if (!seen.insert(v).second) fail(p, "duplicate variant '" + v + "'");
    }
  }
  r.finish();
}

}  // namespace

std::string to_string(Generator g) {
  switch (g) {
    case Generator::Blobs:
      return "blobs";
    case Generator::TinyImages:
      return "tiny_images";
    case Generator::File:
      return "file";
  }
  return "?";
}

std::string to_string(StudyKind k) {
  switch (k) {
    case StudyKind::Single:
      return "single";
    case StudyKind::Figure1:
      return "figure1";
    case StudyKind::Ablation:
      return "ablation";
    case StudyKind::Sweep:
      return "sweep";
  }
  return "?";
}

StudyKind study_kind_from_string(const std::string& name) {
  for (StudyKind k : {StudyKind::Single, StudyKind::Figure1, StudyKind::Ablation, StudyKind::Sweep})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown study kind '" + name + "'");
}

ResolvedSeeds resolve_seeds(const ExperimentConfig& c) {
  ResolvedSeeds s;
  s.global = c.seed;
  s.dataset = c.dataset.seed.value_or(derive_seed(c.seed, kDatasetStream));
  s.noise = c.noise.seed.value_or(derive_seed(c.seed, kNoiseStream));
  s.model = c.model.seed.value_or(derive_seed(c.seed, kModelStream));
  s.schedule = c.schedule.seed.value_or(derive_seed(c.seed, kScheduleStream));
  s.selection = c.selection.seed.value_or(derive_seed(c.seed, kSelectionStream));
  return s;
}

ExperimentConfig parse_config_json(const json& doc) {
  ExperimentConfig c;
  Reader root(doc, "");
  c.seed = root.u64("seed", 0);
  c.output_dir = root.text("output_dir", "");
  read_dataset(root.child("dataset"), c.dataset);
  read_noise(root.child("noise"), c.noise, c.dataset.generator);
  read_model(root.child("model"), c.model, c.dataset);
  read_schedule(root.child("schedule"), c.schedule, stage_count(c.model));
  read_selection(root.child("selection"), c.selection);
  read_study(root.child("study"), c.study);
  root.finish();
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config_json(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(io::read_file(path)); }

json to_json(const OptimizerConfig& c) {
  json j = {{"kind", to_string(c.kind)}, {"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay}};
  if (c.kind == OptimizerKind::Sgd) {
    j["momentum"] = c.momentum;
  } else {
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["epsilon"] = c.epsilon;
  }
  return j;
}

json to_json(const ResolvedSeeds& s) {
  return {{"global", s.global},     {"dataset", s.dataset},   {"noise", s.noise},
          {"model", s.model},       {"schedule", s.schedule}, {"selection", s.selection}};
}

json to_json(const PaddlesSchedule& s) {
  return {{"gate_index", s.gate_index},
          {"t_a", s.t_a},
          {"t_p", s.t_p},
          {"t_0", s.t_0},
          {"suffix_epochs", s.suffix_epochs},
          {"batch_size", s.batch_size},
          {"optimizer", to_json(s.phase_optimizer)},
          {"suffix_optimizer", to_json(s.suffix_optimizer)},
          {"seed", s.seed},
          {"total_epochs", s.total_epochs()}};
}

PaddlesSchedule make_schedule(const ExperimentConfig& c, std::size_t num_stages) {
  PaddlesSchedule s;
  s.gate_index = c.schedule.gate_index.value_or(num_stages - 2);
  s.t_a = c.schedule.t_a;
  s.t_p = c.schedule.t_p;
  s.t_0 = c.schedule.t_0;
  s.suffix_epochs = c.schedule.suffix_epochs.value_or(std::vector<std::size_t>{});
  s.batch_size = c.schedule.batch_size;
  s.phase_optimizer = c.schedule.optimizer;
  s.suffix_optimizer = c.schedule.suffix_optimizer;
  s.seed = resolve_seeds(c).schedule;
  return s;
}

json echo(const ExperimentConfig& c) {
  const ResolvedSeeds seeds = resolve_seeds(c);
  json out;
  out["seed"] = c.seed;
  out["output_dir"] = c.output_dir.string();

  json d = {{"generator", to_string(c.dataset.generator)}};
  if (c.dataset.generator == Generator::File) {
    d["path"] = c.dataset.path.string();
    d["test_path"] = c.dataset.test_path.string();
  } else {
    d["n"] = c.dataset.n;
    d["test_n"] = c.dataset.test_n;
    d["num_classes"] = c.dataset.num_classes;
    d["seed"] = seeds.dataset;
    if (c.dataset.generator == Generator::Blobs) {
      d["dim"] = c.dataset.dim;
      d["separation"] = c.dataset.separation;
      d["spread"] = c.dataset.spread;
    } else {
      d["height"] = c.dataset.height;
      d["width"] = c.dataset.width;
      d["channels"] = c.dataset.channels;
      d["pixel_noise"] = c.dataset.pixel_noise;
      d["phase_jitter"] = c.dataset.phase_jitter;
    }
  }
  out["dataset"] = d;
  out["noise"] = {{"kind", to_string(c.noise.kind)}, {"epsilon", c.noise.epsilon}, {"seed", seeds.noise}};

  json m = {{"kind", c.model.kind}, {"seed", seeds.model}};
  if (c.model.kind == "mlp") {
    m["hidden"] = c.model.hidden;
  } else {
    m["channels"] = c.model.channels;
  }
  out["model"] = m;

  const std::size_t stages = stage_count(c.model);
  out["schedule"] = {{"gate_index", c.schedule.gate_index.value_or(stages - 2)},
                     {"t_a", c.schedule.t_a},
                     {"t_p", c.schedule.t_p},
                     {"t_0", c.schedule.t_0},
                     {"suffix_epochs", c.schedule.suffix_epochs.value_or(std::vector<std::size_t>{})},
                     {"batch_size", c.schedule.batch_size},
                     {"optimizer", to_json(c.schedule.optimizer)},
                     {"suffix_optimizer", to_json(c.schedule.suffix_optimizer)},
                     {"seed", seeds.schedule}};
  out["selection"] = {{"enabled", c.selection.enabled},
                      {"augment_noise", c.selection.augment_noise},
                      {"fit_epochs", c.selection.fit_epochs},
                      {"fresh_start", c.selection.fresh_start},
                      {"fit_optimizer", to_json(c.selection.fit_optimizer)},
                      {"seed", seeds.selection}};

  json st = {{"kind", to_string(c.study.kind)}};
  if (c.study.kind == StudyKind::Figure1) st["epochs"] = c.study.epochs;
  if (c.study.kind == StudyKind::Sweep) {
    st["parameter"] = c.study.parameter;
    st["values"] = c.study.values;
  }
  if (c.study.kind == StudyKind::Ablation) st["variants"] = c.study.variants;
  out["study"] = st;
  return out;
}

}  // namespace paddles
