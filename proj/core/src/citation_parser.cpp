// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/citation_parser.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <optional>
#include <set>

namespace groundcheck {

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// Tokens (lowercased, including the final period) that never end a sentence.
constexpr std::array<std::string_view, 16> kAbbreviations = {
    "e.g.", "i.e.", "etc.", "dr.", "mr.", "mrs.", "ms.", "inc.",
    "ltd.", "vs.", "approx.", "jr.", "sr.", "st.", "cf.", "a.k.a.",
};

// Parses one marker starting at `pos` (which must hold '['). Returns the end
// offset on success.
std::optional<std::size_t> parse_marker_at(std::string_view text, std::size_t pos, std::vector<std::int64_t>& out) {
    out.clear();
    std::size_t i = pos + 1;
    const std::size_t n = text.size();
    auto skip_blanks = [&] {
        while (i < n && is_blank(text[i])) ++i;
    };
    for (;;) {
        skip_blanks();
        std::size_t num_begin = i;
        if (i < n && text[i] == '-') ++i;
        std::size_t digits_begin = i;
        while (i < n && is_digit(text[i])) ++i;
        if (i == digits_begin) return std::nullopt;
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + num_begin, text.data() + i, value);
        if (ec != std::errc{} || ptr != text.data() + i) return std::nullopt;
        out.push_back(value);
        skip_blanks();
        if (i >= n) return std::nullopt;
        if (text[i] == ']') return i + 1;
        if (text[i] != ',') return std::nullopt;
        ++i;
    }
}

// Byte mask of everything deleted by repeated marker removal. Deleting a marker
// can expose a new one (`[[1]2]` leaves `[2]`), so removal runs to a fixpoint.
std::vector<bool> marker_mask(std::string_view text) {
    std::vector<bool> removed(text.size(), false);
    std::string current(text);
    std::vector<std::size_t> origin(text.size());
    for (std::size_t i = 0; i < origin.size(); ++i) origin[i] = i;

    for (;;) {
        auto markers = find_citation_markers(current);
        if (markers.empty()) break;
        std::string next;
        std::vector<std::size_t> next_origin;
        next.reserve(current.size());
        next_origin.reserve(current.size());
        std::size_t pos = 0;
        for (const CitationMarker& m : markers) {
            for (std::size_t k = pos; k < m.span.begin; ++k) {
                next.push_back(current[k]);
                next_origin.push_back(origin[k]);
            }
            for (std::size_t k = m.span.begin; k < m.span.end; ++k) removed[origin[k]] = true;
            pos = m.span.end;
        }
        for (std::size_t k = pos; k < current.size(); ++k) {
            next.push_back(current[k]);
            next_origin.push_back(origin[k]);
        }
        current = std::move(next);
        origin = std::move(next_origin);
    }
    return removed;
}

// Length of a closing quote/bracket at `pos`, or 0.
std::size_t closer_length(std::string_view s, std::size_t pos) {
    char c = s[pos];
    if (c == ')' || c == ']' || c == '"' || c == '\'') return 1;
    auto rest = s.substr(pos);
    if (rest.starts_with("\xE2\x80\x9D") || rest.starts_with("\xE2\x80\x99")) return 3;  // ” ’
    if (rest.starts_with("\xC2\xBB")) return 2;                                          // »
    return 0;
}

// Length of a list bullet ("- ", "* ", "+ ", "• ", "12. ", "3) ") at `pos`, or 0.
std::size_t bullet_length(std::string_view s, std::size_t pos) {
    auto rest = s.substr(pos);
    auto followed_by_blank = [&](std::size_t len) { return rest.size() > len && is_blank(rest[len]); };
    if (!rest.empty() && (rest[0] == '-' || rest[0] == '*' || rest[0] == '+') && followed_by_blank(1)) return 2;
    if (rest.starts_with("\xE2\x80\xA2") && followed_by_blank(3)) return 4;
    std::size_t d = 0;
    while (d < rest.size() && is_digit(rest[d])) ++d;
    if (d > 0 && d < rest.size() && (rest[d] == '.' || rest[d] == ')') && followed_by_blank(d + 1)) return d + 2;
    return 0;
}

bool line_is_bullet(std::string_view s, std::size_t line_start) {
    std::size_t p = line_start;
    while (p < s.size() && is_blank(s[p])) ++p;
    return p < s.size() && bullet_length(s, p) > 0;
}

bool period_is_guarded(std::string_view s, std::size_t dot, std::size_t line_start) {
    std::size_t t = dot;
    while (t > 0 && !is_space(s[t - 1])) --t;
    std::string token;
    for (std::size_t k = t; k <= dot; ++k) token.push_back(ascii_lower(s[k]));
    std::size_t lead = token.find_first_not_of("([{\"'");
    std::string_view core = lead == std::string::npos ? std::string_view{} : std::string_view(token).substr(lead);
    if (std::find(kAbbreviations.begin(), kAbbreviations.end(), core) != kAbbreviations.end()) return true;

    // "1." opening a list line is a label, not a sentence.
    std::string_view label = std::string_view(token).substr(0, token.size() - 1);
    if (!label.empty() && std::all_of(label.begin(), label.end(), is_digit)) {
        bool first_on_line = true;
        for (std::size_t k = line_start; k < t; ++k) first_on_line = first_on_line && is_blank(s[k]);
        if (first_on_line) return true;
    }
    return false;
}

// Sentence end offsets for marker-free text. Every returned offset lies in
// (0, s.size()] and they are strictly increasing.
std::vector<std::size_t> plain_boundaries(std::string_view s) {
    std::vector<std::size_t> ends;
    const std::size_t n = s.size();
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        char c = s[i];
        if (c == '\n') {
            std::size_t next = i + 1;
            std::size_t p = next;
            while (p < n && is_blank(s[p])) ++p;
            bool paragraph_break = p < n && (s[p] == '\n' || s[p] == '\r');
            if (paragraph_break || line_is_bullet(s, line_start) || line_is_bullet(s, next)) ends.push_back(next);
            line_start = next;
            continue;
        }
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i + 1;
        while (j < n) {
            std::size_t len = closer_length(s, j);
            if (len == 0) break;
            j += len;
        }
        if (j < n && !is_space(s[j])) continue;
        if (c == '.' && period_is_guarded(s, i, line_start)) continue;
        ends.push_back(j);
        i = j - 1;
    }
    if (ends.empty() || ends.back() != n) ends.push_back(n);
    // Drop duplicates produced by a newline boundary right after punctuation.
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    return ends;
}

Span trim_span(std::string_view text, Span span) {
    while (span.begin < span.end && is_space(text[span.begin])) ++span.begin;
    while (span.end > span.begin && is_space(text[span.end - 1])) --span.end;
    return span;
}

// Removes one generation of markers, dropping the whitespace they leave behind.
std::string remove_markers_once(std::string_view text, const std::vector<CitationMarker>& markers) {
    static constexpr std::string_view kTight = ".,!?;:)";
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    std::size_t m = 0;
    while (m < markers.size()) {
        out.append(text.substr(pos, markers[m].span.begin - pos));
        bool had_blank = false;
        while (!out.empty() && is_blank(out.back())) {
            out.pop_back();
            had_blank = true;
        }
        // Consume an adjacent run of markers, possibly separated by blanks.
        pos = markers[m].span.end;
        ++m;
        for (;;) {
            std::size_t q = pos;
            while (q < text.size() && is_blank(text[q])) ++q;
            had_blank = had_blank || q > pos;
            if (m < markers.size() && markers[m].span.begin == q) {
                pos = markers[m].span.end;
                ++m;
                continue;
            }
            pos = q;
            break;
        }
        bool at_end = pos >= text.size();
        bool tight = !at_end && kTight.find(text[pos]) != std::string_view::npos;
        if (!at_end && !tight && had_blank && !out.empty() && !is_space(out.back()) && !is_space(text[pos])) {
            out.push_back(' ');
        }
    }
    out.append(text.substr(pos));
    return out;
}

std::string trim_copy(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<CitationMarker> find_citation_markers(std::string_view text) {
    std::vector<CitationMarker> markers;
    std::vector<std::int64_t> indices;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '[') continue;
        if (auto end = parse_marker_at(text, i, indices)) {
            markers.push_back(CitationMarker{Span{i, *end}, indices});
            i = *end - 1;
        }
    }
    return markers;
}

std::string strip_citation_markers(std::string_view text) {
    auto removed = marker_mask(text);
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!removed[i]) out.push_back(text[i]);
    }
    return out;
}

std::vector<SentenceSegment> segment_sentences(std::string_view text) {
    std::vector<SentenceSegment> segments;
    if (text.empty()) return segments;

    auto removed = marker_mask(text);
    std::string stripped;
    std::vector<std::size_t> origin;
    stripped.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (removed[i]) continue;
        stripped.push_back(text[i]);
        origin.push_back(i);
    }
    if (stripped.empty()) return segments;

    // Map each boundary back, extending it over a marker run that follows.
    std::vector<std::size_t> ends;
    for (std::size_t end : plain_boundaries(stripped)) {
        if (end == stripped.size()) {
            ends.push_back(text.size());
            continue;
        }
        std::size_t orig = origin[end - 1] + 1;
        std::size_t p = orig;
        while (stripped[end - 1] != '\n') {
            std::size_t q = p;
            while (q < text.size() && is_blank(text[q])) ++q;
            if (q < text.size() && removed[q]) {
                while (q < text.size() && removed[q]) ++q;
                p = q;
                orig = q;
                continue;
            }
            break;
        }
        ends.push_back(orig);
    }

    auto has_content = [&](Span span) {
        for (std::size_t k = span.begin; k < span.end; ++k) {
            if (!removed[k] && !is_space(text[k])) return true;
        }
        return false;
    };

    std::size_t start = 0;
    for (std::size_t end : ends) {
        if (end <= start) continue;
        Span span = trim_span(text, Span{start, end});
        start = end;
        if (span.size() == 0) continue;
        if (!has_content(span)) {
            if (!segments.empty()) {
                segments.back().span.end = span.end;
                segments.back().text = std::string(text.substr(segments.back().span.begin, segments.back().span.size()));
            }
            continue;
        }
        segments.push_back(SentenceSegment{std::string(text.substr(span.begin, span.size())), span});
    }
    return segments;
}

ParsedCitations parse_citations(std::string_view sentence_text, std::size_t evidence_count) {
    ParsedCitations result;
    std::string current(sentence_text);
    std::set<std::int64_t> seen;
    for (;;) {
        auto markers = find_citation_markers(current);
        if (markers.empty()) break;
        for (const CitationMarker& m : markers) {
            for (std::int64_t idx : m.indices) {
                if (!seen.insert(idx).second) continue;
                bool valid = idx >= 1 && static_cast<std::uint64_t>(idx) <= evidence_count;
                result.refs.push_back(CitationRef{idx, valid});
            }
        }
        current = remove_markers_once(current, markers);
    }
    result.clean_text = trim_copy(current);
    return result;
}

ParsedResponse parse_response(const RawResponse& raw, const EvidenceSet& evidence_set) {
    ParsedResponse parsed;
    parsed.variant = raw.variant;
    for (SentenceSegment& seg : segment_sentences(raw.text)) {
        ParsedCitations pc = parse_citations(seg.text, evidence_set.size());
        std::string text = std::move(pc.clean_text);
        if (std::size_t bullet = bullet_length(text, 0); bullet > 0) text = trim_copy(std::string_view(text).substr(bullet));
        for (const CitationRef& ref : pc.refs) parsed.invalid_citation_count += ref.valid ? 0 : 1;
        parsed.sentences.push_back(Sentence{std::move(text), seg.span, std::move(pc.refs)});
    }
    return parsed;
}

std::vector<int> cited_evidence_indices(const ParsedResponse& parsed) {
    std::set<int> indices;
    for (const Sentence& s : parsed.sentences) {
        for (const CitationRef& ref : s.citations) {
            if (ref.valid) indices.insert(static_cast<int>(ref.raw_index));
        }
    }
    return {indices.begin(), indices.end()};
}

}  // namespace groundcheck
