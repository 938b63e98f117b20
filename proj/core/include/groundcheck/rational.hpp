// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace groundcheck {

/// Exact rate arithmetic. Pooled sums over a corpus must not round.
using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& value);

/// Decimal rendering with exactly `places` fractional digits, rounding half up.
/// Exact: no binary floating point is involved.
std::string format_fixed(const Rational& value, int places = 4);

}  // namespace groundcheck
