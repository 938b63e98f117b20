// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "groundcheck/metrics.hpp"

namespace groundcheck {

enum class ReportFormat { Json, Markdown };
ReportFormat parse_report_format(std::string_view text);

/// Renders per-record rows (sorted by id, then variant) and the corpus
/// aggregate. Output is byte-stable: keys sorted, rates as exact 4-decimal
/// fixed point, undefined rates as null (JSON) or "n/a" (markdown).
std::string render_report(const std::vector<MetricsReport>& reports, ReportFormat format,
                          AggregationMode mode = AggregationMode::Micro);

void save_report(const std::vector<MetricsReport>& reports, const std::filesystem::path& path, ReportFormat format,
                 AggregationMode mode = AggregationMode::Micro);

/// Reads the per-record section of a JSON report. Rates are recomputed from
/// the stored counts, so nothing is lost to the 4-decimal rendering.
std::vector<MetricsReport> load_report(const std::filesystem::path& path);

}  // namespace groundcheck
