// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

// The radq command line, callable in-process so tests can drive it.

#pragma once

#include <iosfwd>

namespace radq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitContract = 2;
inline constexpr int kExitNumerical = 3;

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Data goes to `out` (or the --out file), logs to `err`. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace radq::cli
