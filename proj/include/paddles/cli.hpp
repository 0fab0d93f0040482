// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace paddles {

/// Command-line entry point. `args` excludes the program name.
///   synth-data <config> | run <config> | sweep <config> | figure1 <config> | replay <dir>
///   --out <dir>  --seed <u64>  --quiet
/// Returns 0 on success, 2 for config errors, 3 for numerical aborts, 4 for I/O errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace paddles
