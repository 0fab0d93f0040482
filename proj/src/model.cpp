// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/model.hpp"

#include <cmath>

#include <json.hpp>

#include "paddles/errors.hpp"
#include "paddles/io.hpp"
#include "paddles/ops.hpp"
#include "paddles/rng.hpp"

namespace paddles {

namespace {

constexpr const char* kCheckpointFormat = "paddles-checkpoint-v1";

StageKind stage_kind_from_string(const std::string& name) {
  for (StageKind k : {StageKind::DenseRelu, StageKind::ConvRelu, StageKind::Head}) {
    if (to_string(k) == name) return k;
  }
  throw IoError("unknown stage kind '" + name + "' in checkpoint");
}

}  // namespace

std::string to_string(StageKind kind) {
  switch (kind) {
    case StageKind::DenseRelu:
      return "dense_relu";
    case StageKind::ConvRelu:
      return "conv_relu";
    case StageKind::Head:
      return "head";
  }
  return "unknown";
}

SegmentedModel SegmentedModel::build_mlp(std::vector<std::size_t> widths, std::size_t num_classes,
                                         std::uint64_t seed) {
  if (widths.size() < 2) throw ConfigError("mlp: need an input width and at least one hidden width");
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("mlp: layer width 0");
  }
  if (num_classes == 0) throw ConfigError("mlp: number of classes must be positive");
  SegmentedModel m;
  m.arch_.kind = "mlp";
  m.arch_.widths = widths;
  m.arch_.num_classes = num_classes;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Stage s;
    s.kind = StageKind::DenseRelu;
    s.weight = Tensor::zeros({widths[l], widths[l + 1]}, true);
    s.bias = Tensor::zeros({widths[l + 1]}, true);
    s.fan_in = widths[l];
    m.stages_.push_back(std::move(s));
  }
  Stage head;
  head.kind = StageKind::Head;
  head.weight = Tensor::zeros({widths.back(), num_classes}, true);
  head.bias = Tensor::zeros({num_classes}, true);
  head.fan_in = widths.back();
  m.stages_.push_back(std::move(head));

  m.gate_index_ = m.stages_.size() - 2;
  m.init_seed_ = seed;
  for (std::size_t l = 0; l < m.stages_.size(); ++l) m.init_stage(l, seed);
  return m;
}

SegmentedModel SegmentedModel::build_smallcnn(std::vector<std::size_t> channels, std::size_t num_classes,
                                              std::size_t height, std::size_t width, std::uint64_t seed,
                                              std::size_t in_channels) {
  if (channels.size() < 2 || channels.size() > 4) throw ConfigError("smallcnn: need 2 to 4 conv stages");
  if (height < 4 || width < 4) throw ConfigError("smallcnn: input must be at least 4x4");
  if (in_channels == 0 || num_classes == 0) throw ConfigError("smallcnn: channel and class counts must be positive");
  for (std::size_t c : channels) {
    if (c == 0) throw ConfigError("smallcnn: conv stage with 0 filters");
  }
  SegmentedModel m;
  m.arch_.kind = "smallcnn";
  m.arch_.channels = channels;
  m.arch_.in_channels = in_channels;
  m.arch_.height = height;
  m.arch_.width = width;
  m.arch_.num_classes = num_classes;

  std::size_t h = height, w = width, c_in = in_channels;
  for (std::size_t l = 0; l < channels.size(); ++l) {
    Stage s;
    s.kind = StageKind::ConvRelu;
    s.weight = Tensor::zeros({channels[l], c_in, 3, 3}, true);
    s.bias = Tensor::zeros({channels[l]}, true);
    s.fan_in = c_in * 9;
    s.pool_after = l + 1 < channels.size();
    if (s.pool_after) {
      h /= 2;
      w /= 2;
      if (h == 0 || w == 0) {
        throw ConfigError("smallcnn: spatial extent collapses below 1 after stage " + std::to_string(l));
      }
    }
    c_in = channels[l];
    m.stages_.push_back(std::move(s));
  }
  Stage head;
  head.kind = StageKind::Head;
  head.flatten_before = true;
  head.fan_in = c_in * h * w;
  head.weight = Tensor::zeros({head.fan_in, num_classes}, true);
  head.bias = Tensor::zeros({num_classes}, true);
  m.stages_.push_back(std::move(head));

  m.gate_index_ = m.stages_.size() - 2;
  m.init_seed_ = seed;
  for (std::size_t l = 0; l < m.stages_.size(); ++l) m.init_stage(l, seed);
  return m;
}

void SegmentedModel::init_stage(std::size_t l, std::uint64_t seed) {
  Stage& s = stages_[l];
  Rng rng = Rng(seed).split(l);
  const double bound = std::sqrt(6.0 / static_cast<double>(s.fan_in));
  for (double& v : s.weight.mutable_values()) v = bound * (2.0 * rng.uniform() - 1.0);
  for (double& v : s.bias.mutable_values()) v = 0.0;
  s.weight.set_name("stage" + std::to_string(l) + ".weight");
  s.bias.set_name("stage" + std::to_string(l) + ".bias");
  s.weight.clear_grad();
  s.bias.clear_grad();
}

Shape SegmentedModel::input_shape() const {
  if (arch_.kind == "mlp") return {arch_.widths.front()};
  return {arch_.in_channels, arch_.height, arch_.width};
}

void SegmentedModel::set_gate_index(std::size_t j) {
  if (j >= stages_.size()) {
    throw ConfigError("gate index " + std::to_string(j) + " outside [0, " + std::to_string(stages_.size()) + ")");
  }
  gate_index_ = j;
}

void SegmentedModel::check_input(const Tensor& x) const {
  const Shape expect = input_shape();
  bool ok = x.rank() == expect.size() + 1;
  for (std::size_t a = 0; ok && a < expect.size(); ++a) ok = x.dim(a + 1) == expect[a];
  if (!ok) {
    throw DimensionError("model expects input [N x " + shape_str(expect) + "], got " + shape_str(x.shape()));
  }
}

Tensor SegmentedModel::stage_forward(std::size_t l, const Tensor& x) const {
  const Stage& s = stages_.at(l);
  switch (s.kind) {
    case StageKind::DenseRelu:
      return relu(add_row_bias(matmul(x, s.weight), s.bias));
    case StageKind::ConvRelu: {
      Tensor y = relu(add_channel_bias(conv2d(x, s.weight, 1, 1), s.bias));
      return s.pool_after ? avg_pool2d(y, 2) : y;
    }
    case StageKind::Head: {
      const Tensor in = s.flatten_before ? flatten(x) : x;
      return add_row_bias(matmul(in, s.weight), s.bias);
    }
  }
  throw UsageError("unknown stage kind");
}

Tensor SegmentedModel::forward(const Tensor& x, ForwardTrace* trace) const {
  check_input(x);
  Tensor h = x;
  for (std::size_t l = 0; l < stages_.size(); ++l) {
    h = stage_forward(l, h);
    if (trace) trace->stage_outputs.push_back(h);
    if (l == gate_index_ && gate_enabled_) {
      if (trace) trace->chi = h;
      h = gated_forward(h, gate_mode_);
      if (trace) trace->chi_prime = h;
    }
  }
  return h;
}

Tensor SegmentedModel::forward_plain(const Tensor& x) const {
  check_input(x);
  Tensor h = x;
  for (std::size_t l = 0; l < stages_.size(); ++l) h = stage_forward(l, h);
  return h;
}

std::vector<Tensor> SegmentedModel::parameters() const {
  std::vector<Tensor> out;
  for (const Stage& s : stages_) {
    out.push_back(s.weight);
    out.push_back(s.bias);
  }
  return out;
}

std::vector<Tensor> SegmentedModel::stage_parameters(std::size_t l) const {
  const Stage& s = stages_.at(l);
  return {s.weight, s.bias};
}

std::size_t SegmentedModel::parameter_count() const {
  std::size_t n = 0;
  for (const Stage& s : stages_) n += s.weight.numel() + s.bias.numel();
  return n;
}

void SegmentedModel::freeze_prefix(std::size_t end) {
  if (end > stages_.size()) {
    throw UsageError("freeze_prefix: stage index " + std::to_string(end) + " outside [0, " +
                     std::to_string(stages_.size()) + "]");
  }
  for (std::size_t l = 0; l < stages_.size(); ++l) {
    stages_[l].weight.set_frozen(l < end);
    stages_[l].bias.set_frozen(l < end);
  }
}

bool SegmentedModel::stage_frozen(std::size_t l) const { return stages_.at(l).weight.frozen(); }

void SegmentedModel::reinit_suffix(std::size_t from, std::uint64_t seed) {
  if (from >= stages_.size()) {
    throw UsageError("reinit_suffix: stage index " + std::to_string(from) + " outside [0, " +
                     std::to_string(stages_.size()) + ")");
  }
  for (std::size_t l = from; l < stages_.size(); ++l) init_stage(l, seed);
  reinits_.push_back({from, seed});
}

SegmentedModel SegmentedModel::clone() const {
  SegmentedModel m = *this;
  for (Stage& s : m.stages_) {
    const bool frozen = s.weight.frozen();
    const std::string wname = s.weight.name(), bname = s.bias.name();
    s.weight = s.weight.clone(true);
    s.bias = s.bias.clone(true);
    s.weight.set_name(wname);
    s.bias.set_name(bname);
    s.weight.set_frozen(frozen);
    s.bias.set_frozen(frozen);
  }
  return m;
}

void SegmentedModel::save(const std::filesystem::path& dir, const std::string& stem) const {
  nlohmann::json stages = nlohmann::json::array();
  std::string blob;
  for (const Stage& s : stages_) {
    stages.push_back({{"kind", to_string(s.kind)},
                      {"weight_shape", s.weight.shape()},
                      {"bias_shape", s.bias.shape()},
                      {"pool_after", s.pool_after},
                      {"flatten_before", s.flatten_before},
                      {"frozen", s.weight.frozen()}});
    io::append_f64_le(blob, s.weight.values());
    io::append_f64_le(blob, s.bias.values());
  }
  nlohmann::json reinits = nlohmann::json::array();
  for (const Reinit& r : reinits_) reinits.push_back({{"from", r.from}, {"seed", r.seed}});
  nlohmann::json manifest = {
      {"format", kCheckpointFormat},
      {"architecture",
       {{"kind", arch_.kind},
        {"widths", arch_.widths},
        {"channels", arch_.channels},
        {"in_channels", arch_.in_channels},
        {"height", arch_.height},
        {"width", arch_.width},
        {"num_classes", arch_.num_classes}}},
      {"stages", stages},
      {"gate_index", gate_index_},
      {"gate_mode", to_string(gate_mode_)},
      {"gate_enabled", gate_enabled_},
      {"seeds", {{"init", init_seed_}, {"reinit", reinits}}},
      {"blob", stem + ".bin"},
      {"parameter_count", parameter_count()},
  };
  io::write_file_atomic(dir / (stem + ".bin"), blob);
  io::write_file_atomic(dir / (stem + ".json"), manifest.dump(2) + "\n");
}

SegmentedModel SegmentedModel::load(const std::filesystem::path& dir, const std::string& stem) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_file(dir / (stem + ".json")));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  try {
    if (manifest.at("format") != kCheckpointFormat) throw IoError("unsupported checkpoint format");
    const auto& a = manifest.at("architecture");
    const std::uint64_t seed = manifest.at("seeds").at("init").get<std::uint64_t>();
    SegmentedModel m =
        a.at("kind") == "mlp"
            ? build_mlp(a.at("widths").get<std::vector<std::size_t>>(), a.at("num_classes").get<std::size_t>(), seed)
            : build_smallcnn(a.at("channels").get<std::vector<std::size_t>>(), a.at("num_classes").get<std::size_t>(),
                             a.at("height").get<std::size_t>(), a.at("width").get<std::size_t>(), seed,
                             a.at("in_channels").get<std::size_t>());
    const auto& stages = manifest.at("stages");
    if (stages.size() != m.stages_.size()) throw IoError("checkpoint stage count does not match its architecture");
    const std::string blob = io::read_file(dir / manifest.at("blob").get<std::string>());
    std::size_t offset = 0;
    for (std::size_t l = 0; l < m.stages_.size(); ++l) {
      Stage& s = m.stages_[l];
      if (stage_kind_from_string(stages[l].at("kind")) != s.kind ||
          stages[l].at("weight_shape").get<Shape>() != s.weight.shape()) {
        throw IoError("checkpoint stage " + std::to_string(l) + " does not match its architecture");
      }
      for (Tensor* t : {&s.weight, &s.bias}) {
        auto values = io::decode_f64_le(blob, offset, t->numel());
        std::copy(values.begin(), values.end(), t->mutable_values().begin());
        offset += 8 * t->numel();
      }
      const bool frozen = stages[l].at("frozen").get<bool>();
      s.weight.set_frozen(frozen);
      s.bias.set_frozen(frozen);
    }
    if (offset != blob.size()) throw IoError("checkpoint blob has trailing bytes");
    m.gate_index_ = manifest.at("gate_index").get<std::size_t>();
    m.gate_mode_ = gate_mode_from_string(manifest.at("gate_mode").get<std::string>());
    m.gate_enabled_ = manifest.at("gate_enabled").get<bool>();
    for (const auto& r : manifest.at("seeds").at("reinit")) {
      m.reinits_.push_back({r.at("from").get<std::size_t>(), r.at("seed").get<std::uint64_t>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint manifest: " + std::string(e.what()));
  }
}

}  // namespace paddles
