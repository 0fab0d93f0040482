// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "paddles/cli.hpp"

int main(int argc, char** argv) { return paddles::run_cli(std::vector<std::string>(argv + 1, argv + argc)); }
