// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace paddles {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes disagree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid model, schedule or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Invalid data handed to an operation (labels, rates, empty sets).
class InputError : public Error {
 public:
  using Error::Error;
};

/// API misuse: backward on a non-scalar, stepping without gradients, ...
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A computation produced values that violate a numerical contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace paddles
