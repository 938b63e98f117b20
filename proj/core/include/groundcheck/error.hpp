// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace groundcheck {

/// Failure classes; the CLI maps each one onto a process exit code.
enum class ErrorKind : int {
    Validation = 1,
    Backend = 2,
    TruthMismatch = 3,
    Io = 4,
    Capacity = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void throw_validation(const std::string& message);
[[noreturn]] void throw_backend(const std::string& message);
[[noreturn]] void throw_io(const std::string& message);

}  // namespace groundcheck
