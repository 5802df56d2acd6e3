// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace radq {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, unreadable, or invalid input data (files, records, weights).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation's contract: mismatched dimensions,
/// unknown enum names, misaligned ids.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during training (non-finite gradients and the like).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace radq
