// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "paddles/tensor.hpp"

namespace paddles::io {

/// Appends `values` as little-endian IEEE-754 binary64 to `out`.
void append_f64_le(std::string& out, std::span<const double> values);
/// Decodes `count` little-endian binary64 values starting at `offset`.
std::vector<double> decode_f64_le(const std::string& bytes, std::size_t offset, std::size_t count);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never see a
/// partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Raw tensor files: `<stem>.bin` plus `<stem>.json` header.
void save_tensor(const std::filesystem::path& dir, const std::string& stem, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& dir, const std::string& stem);

}  // namespace paddles::io
