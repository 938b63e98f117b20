// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/error.hpp"

namespace groundcheck {

Error::Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

void throw_validation(const std::string& message) { throw Error(ErrorKind::Validation, message); }
void throw_backend(const std::string& message) { throw Error(ErrorKind::Backend, message); }
void throw_io(const std::string& message) { throw Error(ErrorKind::Io, message); }

}  // namespace groundcheck
