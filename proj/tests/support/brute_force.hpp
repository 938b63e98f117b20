// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "groundcheck/metrics.hpp"
#include "groundcheck/model.hpp"

namespace groundcheck::testing {

/// Recomputes every count of one response straight from the lexical oracle:
/// no judge front end, no memo cache, and every (claim, evidence) and
/// (citation, sentence) pair is checked even after the answer is known.
ResponseCounts brute_force_counts(const BenchmarkRecord& record, Variant variant);

}  // namespace groundcheck::testing
