// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundcheck/citation_parser.hpp"
#include "groundcheck/judge.hpp"
#include "groundcheck/model.hpp"
#include "groundcheck/rational.hpp"
#include "groundcheck/refusal.hpp"

namespace groundcheck {

enum class Metric { Cgr, Ccr, Psr, Scr, Eur };
inline constexpr std::array<Metric, 5> kAllMetrics = {Metric::Cgr, Metric::Ccr, Metric::Psr, Metric::Scr,
                                                      Metric::Eur};
std::string_view to_string(Metric metric);

/// Raw counts behind the five rates of one response.
struct ResponseCounts {
    std::int64_t m = 0;         // claims
    std::int64_t m_ground = 0;  // claims entailed by some evidence
    std::int64_t r = 0;         // citations, invalid ones included
    std::int64_t r_entail = 0;  // citations that are valid and entail their sentence
    std::int64_t n = 0;         // sentences
    std::int64_t n_cited = 0;   // sentences with at least one citation
    std::int64_t n_pcited = 0;  // cited sentences whose citations are all correct
    std::int64_t k_ground = 0;  // distinct valid evidences cited anywhere
    std::int64_t E = 0;         // evidence-set size

    /// Throws on negative counts or a violated ordering (e.g. m_ground > m).
    void validate() const;

    friend bool operator==(const ResponseCounts&, const ResponseCounts&) = default;
};

/// A rate as pooled numerator over integer denominator; the rate is undefined
/// when the denominator is zero.
struct RatePair {
    Rational numerator;
    std::int64_t denominator = 0;
};

/// The per-record contribution of `metric` to a micro (pooled) aggregate.
/// Every metric is a plain count ratio except EUR, whose numerator is
/// k * (1 - (E - k) / E^2) over a denominator of E.
RatePair rate_pair(const ResponseCounts& counts, Metric metric);
std::optional<Rational> rate_of(const ResponseCounts& counts, Metric metric);

/// (k / E) * (1 - (E - k) / E^2). Requires 0 <= k <= E and E >= 1.
Rational evidence_utilization(std::int64_t k, std::int64_t evidence_count);

struct MetricsReport {
    std::string id;
    Variant variant = Variant::Citation;
    ResponseCounts counts;
    std::optional<Rational> cgr, ccr, psr, scr, eur;
    bool refusal = false;

    static MetricsReport from_counts(std::string id, Variant variant, const ResponseCounts& counts, bool refusal);
    const std::optional<Rational>& get(Metric metric) const;
};

struct RateResult {
    std::optional<Rational> rate;
    std::int64_t numerator = 0;
    std::int64_t denominator = 0;
};

/// CGR. A claim is grounded when some evidence entails it; evidences are
/// scanned in retrieval order and the scan stops at the first hit.
RateResult claim_grounding_rate(const std::vector<Claim>& claims, const EvidenceSet& evidence_set, Judge& judge);
/// CCR. Invalid indices count in the denominator and are never correct.
RateResult correct_citation_rate(const ParsedResponse& parsed, const EvidenceSet& evidence_set, Judge& judge);
/// PSR over sentences that carry at least one citation.
RateResult perfect_sentence_rate(const ParsedResponse& parsed, const EvidenceSet& evidence_set, Judge& judge);
/// SCR. Judge-free.
RateResult sentence_citation_rate(const ParsedResponse& parsed);

struct UtilizationResult {
    std::optional<Rational> rate;
    std::int64_t k_ground = 0;
    std::int64_t evidence_count = 0;
};
/// EUR. Judge-free; undefined only for an empty evidence set.
UtilizationResult evidence_utilization_rate(const ParsedResponse& parsed, const EvidenceSet& evidence_set);

/// Parses the response for `variant`, decomposes claims, computes all five
/// metrics plus the refusal flag. Judge calls are shared through the judge's
/// memo cache.
MetricsReport evaluate_response(const BenchmarkRecord& record, Variant variant, Judge& judge,
                                const RefusalDetector& refusal);

enum class AggregationMode { Micro, Macro };
std::string_view to_string(AggregationMode mode);
AggregationMode parse_aggregation_mode(std::string_view text);

struct MetricAggregate {
    std::optional<Rational> value;
    std::size_t undefined_records = 0;
};

struct AggregateReport {
    AggregationMode mode = AggregationMode::Micro;
    std::size_t records = 0;
    std::map<Metric, MetricAggregate> metrics;
};

/// Micro pools numerators and denominators; macro averages the defined
/// per-record rates. Both report how many records were undefined per metric.
AggregateReport aggregate_corpus(const std::vector<MetricsReport>& reports, AggregationMode mode);

}  // namespace groundcheck
