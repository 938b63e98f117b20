// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "marker_strings.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <fmt/format.h>

#include "groundcheck/citation_parser.hpp"

namespace groundcheck::testing {

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '\n') {
            out += "\\n";
        } else if (c == '\t') {
            out += "\\t";
        } else {
            out += c;
        }
    }
    return out + "\"";
}

const std::vector<std::string> kWords = {"grip",   "felt",  "steady", "on",    "long",  "runs",  "the",
                                         "battery", "lasted", "well",  "price", "was",   "fair",  "seams",
                                         "held",   "after", "rain",   "crema", "tasted", "bold", "noise"};
const std::vector<std::string> kPunct = {".", "!", "?"};

std::string capitalize(std::string w) {
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
}

// Appends one marker run to `text` and records its indices.
void add_run(Rng& rng, MarkedText& m, std::vector<std::int64_t>& cited) {
    const std::size_t evidence_count = m.evidence_count;
    std::string& text = m.text;
    const std::uint64_t markers = 1 + rng.below(3);
    for (std::uint64_t k = 0; k < markers; ++k) {
        const std::uint64_t count = 1 + rng.below(3);
        std::vector<std::string> parts;
        for (std::uint64_t c = 0; c < count; ++c) {
            std::int64_t idx = static_cast<std::int64_t>(rng.below(evidence_count + 4)) - 1;  // -1 .. E+2
            cited.push_back(idx);
            parts.push_back(std::to_string(idx));
        }
        switch (rng.below(3)) {
            case 0: text += "[" + fmt::format("{}", fmt::join(parts, ",")) + "]"; break;
            case 1: text += "[" + fmt::format("{}", fmt::join(parts, ", ")) + "]"; break;
            default: text += "[ " + fmt::format("{}", fmt::join(parts, " , ")) + " ]"; break;
        }
        if (k + 1 < markers && rng.bernoulli(0.3)) {
            text += " ";
            m.stripped += " ";
        }
    }
}

std::vector<std::int64_t> dedup(const std::vector<std::int64_t>& v) {
    std::vector<std::int64_t> out;
    for (std::int64_t x : v) {
        if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    }
    return out;
}

}  // namespace

MarkedText random_marked_text(Rng& rng) {
    MarkedText m;
    m.evidence_count = static_cast<std::size_t>(rng.below(8));
    const bool bullets = rng.bernoulli(0.15);
    const std::uint64_t n_sentences = 1 + rng.below(5);

    for (std::uint64_t s = 0; s < n_sentences; ++s) {
        if (s > 0) {
            std::string sep = bullets ? "\n" : (rng.bernoulli(0.1) ? "\n\n" : " ");
            m.text += sep;
            m.stripped += sep;
        }
        if (bullets) {
            m.text += "- ";
            m.stripped += "- ";
        }
        std::vector<std::int64_t> cited;
        std::string clean;
        const std::uint64_t n_words = 1 + rng.below(8);
        for (std::uint64_t w = 0; w < n_words; ++w) {
            std::string word = rng.pick(kWords);
            if (w == 0) word = capitalize(word);
            if (w > 0) {
                m.text += " ";
                m.stripped += " ";
                clean += " ";
            }
            m.text += word;
            m.stripped += word;
            clean += word;
            if (rng.bernoulli(0.2)) {
                // Marker after this word: tight or spaced, before the next word or the punctuation.
                if (rng.bernoulli(0.5)) {
                    m.text += " ";
                    m.stripped += " ";
                }
                add_run(rng, m, cited);
            }
        }
        const std::string& punct = rng.pick(kPunct);
        m.text += punct;
        m.stripped += punct;
        clean += punct;
        if (rng.bernoulli(0.25)) {
            if (rng.bernoulli(0.5)) {
                m.text += " ";
                m.stripped += " ";
            }
            add_run(rng, m, cited);
        }
        m.sentences.push_back(ExpectedSentence{clean, dedup(cited)});
    }
    return m;
}

std::string random_bracket_noise(Rng& rng) {
    static const std::string kAlphabet = "[[[]]],,--0123456789  ..!?\nab\t";
    std::string out;
    const std::uint64_t len = rng.below(60);
    for (std::uint64_t i = 0; i < len; ++i) out.push_back(kAlphabet[rng.below(kAlphabet.size())]);
    return out;
}

namespace {

std::optional<std::string> check_common(const std::string& text, const ParsedResponse& parsed, std::size_t evidence_count) {
    const std::string stripped = strip_citation_markers(text);
    if (strip_citation_markers(stripped) != stripped) return "strip is not idempotent";
    if (!find_citation_markers(stripped).empty()) return "markers survive stripping";
    if (segment_sentences(stripped).size() != parsed.sentences.size()) {
        return fmt::format("marker transparency: {} sentences with markers, {} without", parsed.sentences.size(),
                           segment_sentences(stripped).size());
    }
    std::size_t prev_end = 0;
    std::size_t invalid = 0;
    for (const Sentence& s : parsed.sentences) {
        if (s.span.begin < prev_end || s.span.end > text.size() || s.span.begin >= s.span.end) {
            return "sentence spans are not ordered, disjoint and in bounds";
        }
        prev_end = s.span.end;
        std::set<std::int64_t> seen;
        for (const CitationRef& r : s.citations) {
            if (!seen.insert(r.raw_index).second) return fmt::format("duplicate citation [{}]", r.raw_index);
            const bool valid = r.raw_index >= 1 && r.raw_index <= static_cast<std::int64_t>(evidence_count);
            if (r.valid != valid) return fmt::format("citation [{}] has the wrong validity", r.raw_index);
            invalid += valid ? 0 : 1;
        }
        if (!find_citation_markers(s.text).empty()) return "sentence text still contains a marker";
    }
    if (invalid != parsed.invalid_citation_count) return "invalid_citation_count disagrees with the citations";
    // Spans cover every non-whitespace byte; text made only of markers has no sentences.
    std::vector<bool> covered(text.size(), false);
    for (const Sentence& s : parsed.sentences) std::fill(covered.begin() + s.span.begin, covered.begin() + s.span.end, true);
    const bool marker_only = stripped.find_first_not_of(" \t\n\r\f\v") == std::string::npos;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (covered[i] || std::isspace(static_cast<unsigned char>(text[i]))) continue;
        if (parsed.sentences.empty() && marker_only) continue;
        return fmt::format("byte {} is outside every sentence span", i);
    }
    return std::nullopt;
}

// Writes each sentence back with canonical markers placed before its final character.
std::string reinject(const ParsedResponse& parsed) {
    std::string out;
    for (const Sentence& s : parsed.sentences) {
        if (!out.empty()) out += ' ';
        std::string body = s.text.substr(0, s.text.size() - 1);
        for (const CitationRef& r : s.citations) body += fmt::format(" [{}]", r.raw_index);
        out += body + s.text.back();
    }
    return out;
}

}  // namespace

std::optional<std::string> check_marked_text(const MarkedText& m) {
    auto where = [&](const std::string& what) { return fmt::format("{} in {}", what, quoted(m.text)); };
    if (strip_citation_markers(m.text) != m.stripped) return where("stripping removed more or less than the markers");

    std::vector<Evidence> ev;
    for (std::size_t i = 1; i <= m.evidence_count; ++i) ev.push_back(Evidence{static_cast<int>(i), EvidenceKind::CustomerReview, "evidence text", true});
    const EvidenceSet es(std::move(ev));
    const ParsedResponse parsed = parse_response(RawResponse{m.text, Variant::Citation}, es);
    if (auto bad = check_common(m.text, parsed, m.evidence_count)) return where(*bad);

    if (parsed.sentences.size() != m.sentences.size()) {
        return where(fmt::format("expected {} sentences, parsed {}", m.sentences.size(), parsed.sentences.size()));
    }
    for (std::size_t i = 0; i < m.sentences.size(); ++i) {
        const Sentence& got = parsed.sentences[i];
        if (got.text != m.sentences[i].clean) return where(fmt::format("sentence {} reads {}", i, quoted(got.text)));
        std::vector<std::int64_t> idx;
        for (const CitationRef& r : got.citations) idx.push_back(r.raw_index);
        if (idx != m.sentences[i].cited) return where(fmt::format("sentence {} has the wrong citations", i));
    }

    // Round trip: canonical re-rendering parses to the same sentences and citations.
    const ParsedResponse again = parse_response(RawResponse{reinject(parsed), Variant::Citation}, es);
    if (again.sentences.size() != parsed.sentences.size()) return where("round trip changed the sentence count");
    for (std::size_t i = 0; i < again.sentences.size(); ++i) {
        if (again.sentences[i].text != parsed.sentences[i].text ||
            again.sentences[i].citations != parsed.sentences[i].citations) {
            return where(fmt::format("round trip changed sentence {}", i));
        }
    }
    return std::nullopt;
}

std::optional<std::string> check_noise(const std::string& text, std::size_t evidence_count) {
    std::vector<Evidence> ev;
    for (std::size_t i = 1; i <= evidence_count; ++i) ev.push_back(Evidence{static_cast<int>(i), EvidenceKind::CustomerReview, "evidence text", true});
    const EvidenceSet es(std::move(ev));
    const ParsedResponse parsed = parse_response(RawResponse{text, Variant::Citation}, es);
    if (auto bad = check_common(text, parsed, evidence_count)) return fmt::format("{} in {}", *bad, quoted(text));
    return std::nullopt;
}

}  // namespace groundcheck::testing
