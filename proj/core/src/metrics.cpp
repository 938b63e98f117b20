// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/metrics.hpp"

#include <fmt/format.h>

#include "groundcheck/error.hpp"

namespace groundcheck {

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::Cgr: return "cgr";
        case Metric::Ccr: return "ccr";
        case Metric::Psr: return "psr";
        case Metric::Scr: return "scr";
        case Metric::Eur: return "eur";
    }
    return "cgr";
}

std::string_view to_string(AggregationMode mode) { return mode == AggregationMode::Micro ? "micro" : "macro"; }

AggregationMode parse_aggregation_mode(std::string_view text) {
    if (text == "micro") return AggregationMode::Micro;
    if (text == "macro") return AggregationMode::Macro;
    throw_validation(fmt::format("unknown aggregation mode '{}'", text));
}

void ResponseCounts::validate() const {
    for (auto v : {m, m_ground, r, r_entail, n, n_cited, n_pcited, k_ground, E}) {
        if (v < 0) throw_validation("response counts must be non-negative");
    }
    if (m_ground > m) throw_validation("m_ground exceeds m");
    if (r_entail > r) throw_validation("r_entail exceeds r");
    if (n_pcited > n_cited || n_cited > n) throw_validation("expected n_pcited <= n_cited <= n");
    if (k_ground > E) throw_validation("k_ground exceeds E");
}

Rational evidence_utilization(std::int64_t k, std::int64_t evidence_count) {
    if (evidence_count < 1 || k < 0 || k > evidence_count) {
        throw_validation(fmt::format("EUR needs 0 <= k <= E and E >= 1 (k={}, E={})", k, evidence_count));
    }
    Rational e(evidence_count);
    return Rational(k) / e * (Rational(1) - Rational(evidence_count - k) / (e * e));
}

RatePair rate_pair(const ResponseCounts& c, Metric metric) {
    switch (metric) {
        case Metric::Cgr: return {Rational(c.m_ground), c.m};
        case Metric::Ccr: return {Rational(c.r_entail), c.r};
        case Metric::Psr: return {Rational(c.n_pcited), c.n_cited};
        case Metric::Scr: return {Rational(c.n_cited), c.n};
        case Metric::Eur:
            if (c.E == 0) return {Rational(0), 0};
            return {evidence_utilization(c.k_ground, c.E) * c.E, c.E};
    }
    return {Rational(0), 0};
}

std::optional<Rational> rate_of(const ResponseCounts& counts, Metric metric) {
    RatePair pair = rate_pair(counts, metric);
    if (pair.denominator == 0) return std::nullopt;
    return pair.numerator / pair.denominator;
}

MetricsReport MetricsReport::from_counts(std::string id, Variant variant, const ResponseCounts& counts,
                                         bool refusal) {
    counts.validate();
    MetricsReport report;
    report.id = std::move(id);
    report.variant = variant;
    report.counts = counts;
    report.refusal = refusal;
    report.cgr = rate_of(counts, Metric::Cgr);
    report.ccr = rate_of(counts, Metric::Ccr);
    report.psr = rate_of(counts, Metric::Psr);
    report.scr = rate_of(counts, Metric::Scr);
    report.eur = rate_of(counts, Metric::Eur);
    return report;
}

const std::optional<Rational>& MetricsReport::get(Metric metric) const {
    switch (metric) {
        case Metric::Cgr: return cgr;
        case Metric::Ccr: return ccr;
        case Metric::Psr: return psr;
        case Metric::Scr: return scr;
        case Metric::Eur: return eur;
    }
    return cgr;
}

namespace {

RateResult make_rate(std::int64_t numerator, std::int64_t denominator) {
    RateResult result{std::nullopt, numerator, denominator};
    if (denominator > 0) result.rate = Rational(numerator, denominator);
    return result;
}

bool citation_correct(const CitationRef& ref, const Sentence& sentence, const EvidenceSet& evidence_set,
                      Judge& judge) {
    if (!ref.valid || sentence.text.empty()) return false;
    return judge.entails(evidence_set.at(static_cast<int>(ref.raw_index)).text, sentence.text).entails;
}

}  // namespace

RateResult claim_grounding_rate(const std::vector<Claim>& claims, const EvidenceSet& evidence_set, Judge& judge) {
    std::int64_t grounded = 0;
    for (const Claim& claim : claims) {
        if (claim.text.empty()) throw_validation("claims must have non-empty text");
        for (const Evidence& e : evidence_set) {
            if (judge.entails(e.text, claim.text).entails) {
                ++grounded;
                break;
            }
        }
    }
    return make_rate(grounded, static_cast<std::int64_t>(claims.size()));
}

RateResult correct_citation_rate(const ParsedResponse& parsed, const EvidenceSet& evidence_set, Judge& judge) {
    std::int64_t cited = 0, entailed = 0;
    for (const Sentence& s : parsed.sentences) {
        for (const CitationRef& ref : s.citations) {
            ++cited;
            if (citation_correct(ref, s, evidence_set, judge)) ++entailed;
        }
    }
    return make_rate(entailed, cited);
}

RateResult perfect_sentence_rate(const ParsedResponse& parsed, const EvidenceSet& evidence_set, Judge& judge) {
    std::int64_t cited_sentences = 0, perfect = 0;
    for (const Sentence& s : parsed.sentences) {
        if (!s.has_citations()) continue;
        ++cited_sentences;
        bool all_correct = true;
        for (const CitationRef& ref : s.citations) {
            if (!citation_correct(ref, s, evidence_set, judge)) {
                all_correct = false;
                break;
            }
        }
        if (all_correct) ++perfect;
    }
    return make_rate(perfect, cited_sentences);
}

RateResult sentence_citation_rate(const ParsedResponse& parsed) {
    std::int64_t cited = 0;
    for (const Sentence& s : parsed.sentences) cited += s.has_citations() ? 1 : 0;
    return make_rate(cited, static_cast<std::int64_t>(parsed.sentences.size()));
}

UtilizationResult evidence_utilization_rate(const ParsedResponse& parsed, const EvidenceSet& evidence_set) {
    UtilizationResult result;
    result.k_ground = static_cast<std::int64_t>(cited_evidence_indices(parsed).size());
    result.evidence_count = static_cast<std::int64_t>(evidence_set.size());
    if (result.evidence_count > 0) result.rate = evidence_utilization(result.k_ground, result.evidence_count);
    return result;
}

MetricsReport evaluate_response(const BenchmarkRecord& record, Variant variant, Judge& judge,
                                const RefusalDetector& refusal) {
    const RawResponse* response = record.response(variant);
    if (!response) {
        throw_validation(fmt::format("record '{}' has no {} response", record.id(), to_string(variant)));
    }
    const EvidenceSet& evidences = record.query_record.evidence_set;
    ParsedResponse parsed = parse_response(*response, evidences);
    std::vector<Claim> claims = judge.decompose_claims(response->text);

    RateResult cgr = claim_grounding_rate(claims, evidences, judge);
    RateResult ccr = correct_citation_rate(parsed, evidences, judge);
    RateResult psr = perfect_sentence_rate(parsed, evidences, judge);
    RateResult scr = sentence_citation_rate(parsed);
    UtilizationResult eur = evidence_utilization_rate(parsed, evidences);

    ResponseCounts counts;
    counts.m = cgr.denominator;
    counts.m_ground = cgr.numerator;
    counts.r = ccr.denominator;
    counts.r_entail = ccr.numerator;
    counts.n = scr.denominator;
    counts.n_cited = scr.numerator;
    counts.n_pcited = psr.numerator;
    counts.k_ground = eur.k_ground;
    counts.E = eur.evidence_count;
    return MetricsReport::from_counts(record.id(), variant, counts, refusal.detect(response->text));
}

AggregateReport aggregate_corpus(const std::vector<MetricsReport>& reports, AggregationMode mode) {
    AggregateReport aggregate;
    aggregate.mode = mode;
    aggregate.records = reports.size();
    for (Metric metric : kAllMetrics) {
        MetricAggregate& out = aggregate.metrics[metric];
        Rational numerator_sum(0), rate_sum(0);
        std::int64_t denominator_sum = 0;
        std::size_t defined = 0;
        for (const MetricsReport& report : reports) {
            RatePair pair = rate_pair(report.counts, metric);
            if (pair.denominator == 0) {
                ++out.undefined_records;
                continue;
            }
            ++defined;
            numerator_sum += pair.numerator;
            denominator_sum += pair.denominator;
            rate_sum += pair.numerator / pair.denominator;
        }
        if (defined == 0) continue;
        out.value = mode == AggregationMode::Micro ? Rational(numerator_sum / denominator_sum)
                                                   : Rational(rate_sum / static_cast<std::int64_t>(defined));
    }
    return aggregate;
}

}  // namespace groundcheck
