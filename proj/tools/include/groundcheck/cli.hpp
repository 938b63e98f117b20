// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "groundcheck/error.hpp"

namespace groundcheck::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitBackend = 2;
inline constexpr int kExitTruthMismatch = 3;

int exit_code_for(ErrorKind kind) noexcept;

/// Runs one invocation. `args` excludes the program name. Reports and tables
/// go to `out` unless an output file is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace groundcheck::cli
