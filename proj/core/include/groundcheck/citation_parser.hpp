// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "groundcheck/model.hpp"

namespace groundcheck {

/// A bracketed citation as written. `valid` iff 1 <= raw_index <= |E|.
struct CitationRef {
    std::int64_t raw_index = 0;
    bool valid = false;

    friend bool operator==(const CitationRef&, const CitationRef&) = default;
};

/// Half-open byte range into the raw response.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const Span&, const Span&) = default;
};

struct Sentence {
    /// Sentence text with citation markers (and any list bullet) removed.
    std::string text;
    Span span;
    /// Deduplicated by raw_index, in order of first appearance.
    std::vector<CitationRef> citations;

    bool has_citations() const noexcept { return !citations.empty(); }
    friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct ParsedResponse {
    std::vector<Sentence> sentences;
    Variant variant = Variant::Citation;
    std::size_t invalid_citation_count = 0;

    friend bool operator==(const ParsedResponse&, const ParsedResponse&) = default;
};

struct SentenceSegment {
    std::string text;
    Span span;

    friend bool operator==(const SentenceSegment&, const SentenceSegment&) = default;
};

struct ParsedCitations {
    std::string clean_text;
    std::vector<CitationRef> refs;
};

/// A recognized marker such as `[3]`, `[1,4]` or `[ 2 , 5 ]`.
struct CitationMarker {
    Span span;
    std::vector<std::int64_t> indices;
};

/// All recognized markers in `text`, in order. Unparseable brackets like `[a]` are skipped.
std::vector<CitationMarker> find_citation_markers(std::string_view text);

/// `text` with every recognized marker deleted and nothing else changed.
std::string strip_citation_markers(std::string_view text);

/// Rule-based sentence splitter.
///
/// A sentence ends at `.`, `!` or `?` (optionally followed by closing quotes or
/// brackets) when whitespace or end of input follows. Citation markers are
/// transparent to this test, and a marker run right after the terminal
/// punctuation stays with the sentence it follows. Known abbreviations,
/// decimals and numbered-list labels never end a sentence. A newline ends a
/// bullet line, and a blank line ends a paragraph.
std::vector<SentenceSegment> segment_sentences(std::string_view text);

/// Extracts the markers of one sentence and removes them together with the
/// whitespace they leave behind.
ParsedCitations parse_citations(std::string_view sentence_text, std::size_t evidence_count);

ParsedResponse parse_response(const RawResponse& raw, const EvidenceSet& evidence_set);

/// Raw indices of every valid citation in the response, ascending and distinct.
std::vector<int> cited_evidence_indices(const ParsedResponse& parsed);

}  // namespace groundcheck
