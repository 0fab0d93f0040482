// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "paddles/errors.hpp"

namespace paddles::io {

namespace {

constexpr const char* kTensorMagic = "PADDLES-TENSOR";

}  // namespace

void append_f64_le(std::string& out, std::span<const double> values) {
  const std::size_t base = out.size();
  out.resize(base + 8 * values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) out[base + 8 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
}

std::vector<double> decode_f64_le(const std::string& bytes, std::size_t offset, std::size_t count) {
  if (offset + 8 * count > bytes.size()) {
    throw IoError("binary blob too short: need " + std::to_string(offset + 8 * count) + " bytes, have " +
                  std::to_string(bytes.size()));
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + 8 * i + b])) << (8 * b);
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void save_tensor(const std::filesystem::path& dir, const std::string& stem, const Tensor& t) {
  std::string blob;
  append_f64_le(blob, t.values());
  nlohmann::json header = {{"magic", kTensorMagic}, {"version", 1}, {"dtype", "float64"}, {"shape", t.shape()}};
  write_file_atomic(dir / (stem + ".bin"), blob);
  write_file_atomic(dir / (stem + ".json"), header.dump(2) + "\n");
}

Tensor load_tensor(const std::filesystem::path& dir, const std::string& stem) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(read_file(dir / (stem + ".json")));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed tensor header " + (dir / (stem + ".json")).string() + ": " + e.what());
  }
  if (header.value("magic", "") != kTensorMagic || header.value("dtype", "") != "float64") {
    throw IoError("unsupported tensor header in " + (dir / (stem + ".json")).string());
  }
  Shape shape = header.at("shape").get<Shape>();
  const std::string blob = read_file(dir / (stem + ".bin"));
  const std::size_t count = shape_numel(shape);
  if (blob.size() != 8 * count) {
    throw IoError("tensor blob " + (dir / (stem + ".bin")).string() + " has " + std::to_string(blob.size()) +
                  " bytes, header implies " + std::to_string(8 * count));
  }
  return Tensor::from(std::move(shape), decode_f64_le(blob, 0, count));
}

}  // namespace paddles::io
