// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "brute_force.hpp"

#include <set>
#include <stdexcept>

#include "groundcheck/citation_parser.hpp"
#include "groundcheck/judge.hpp"

namespace groundcheck::testing {

ResponseCounts brute_force_counts(const BenchmarkRecord& record, Variant variant) {
    const RawResponse* raw = record.response(variant);
    if (raw == nullptr) throw std::invalid_argument("missing response");
    const EvidenceSet& es = record.query_record.evidence_set;
    ResponseCounts c;
    c.E = static_cast<std::int64_t>(es.size());

    LexicalOracle oracle;
    for (const Claim& claim : oracle.decompose(raw->text)) {
        int supporting = 0;
        for (const Evidence& e : es) supporting += LexicalOracle::entails(e.text, claim.text) ? 1 : 0;
        ++c.m;
        c.m_ground += supporting > 0 ? 1 : 0;
    }

    std::set<std::int64_t> cited;
    const ParsedResponse parsed = parse_response(*raw, es);
    for (const Sentence& s : parsed.sentences) {
        ++c.n;
        if (s.citations.empty()) continue;
        ++c.n_cited;
        int correct = 0;
        for (const CitationRef& ref : s.citations) {
            ++c.r;
            const bool in_range = ref.raw_index >= 1 && ref.raw_index <= c.E;
            const bool ok = in_range && !s.text.empty() &&
                            LexicalOracle::entails(es.at(static_cast<int>(ref.raw_index)).text, s.text);
            correct += ok ? 1 : 0;
            if (in_range) cited.insert(ref.raw_index);
        }
        c.r_entail += correct;
        c.n_pcited += correct == static_cast<int>(s.citations.size()) ? 1 : 0;
    }
    c.k_ground = static_cast<std::int64_t>(cited.size());
    return c;
}

}  // namespace groundcheck::testing
