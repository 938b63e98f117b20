// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/refusal.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "groundcheck/citation_parser.hpp"
#include "groundcheck/error.hpp"
#include "groundcheck/judge.hpp"

namespace groundcheck {

namespace {

constexpr std::string_view kUnavailableStatement = "The provided information does not mention this.";

// Lowercase ASCII and fold typographic apostrophes so "don’t" matches "don't".
std::string normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text.substr(i).starts_with("\xE2\x80\x99") || text.substr(i).starts_with("\xE2\x80\x98")) {
            out.push_back('\'');
            i += 2;
            continue;
        }
        char c = text[i];
        out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    }
    return out;
}

}  // namespace

const std::vector<std::string>& RefusalDetector::default_patterns() {
    static const std::vector<std::string> patterns = {
        "do not provide information",
        "don't have enough information",
        "no information about",
        "couldn't find",
        "not mentioned in the reviews",
    };
    return patterns;
}

RefusalDetector::RefusalDetector() : RefusalDetector(default_patterns()) {}

RefusalDetector::RefusalDetector(std::vector<std::string> patterns) {
    for (auto& p : patterns) {
        std::string norm = normalize(p);
        if (!norm.empty()) patterns_.push_back(std::move(norm));
    }
}

RefusalDetector RefusalDetector::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_io(fmt::format("cannot read refusal pattern file '{}'", path.string()));
    std::vector<std::string> patterns;
    std::string line;
    while (std::getline(in, line)) {
        auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos || line[begin] == '#') continue;
        auto end = line.find_last_not_of(" \t\r");
        patterns.push_back(line.substr(begin, end - begin + 1));
    }
    return RefusalDetector(std::move(patterns));
}

bool RefusalDetector::sentence_matches(std::string_view sentence) const {
    std::string norm = normalize(sentence);
    return std::any_of(patterns_.begin(), patterns_.end(),
                       [&](const std::string& p) { return norm.find(p) != std::string::npos; });
}

bool RefusalDetector::detect(std::string_view response_text) const {
    for (const SentenceSegment& seg : segment_sentences(response_text)) {
        if (sentence_matches(seg.text)) return true;
    }
    return false;
}

bool RefusalDetector::detect(std::string_view response_text, Judge& judge) const {
    for (const SentenceSegment& seg : segment_sentences(response_text)) {
        if (sentence_matches(seg.text)) return true;
        std::string clean = parse_citations(seg.text, 0).clean_text;
        if (!clean.empty() && judge.entails(clean, kUnavailableStatement).entails) return true;
    }
    return false;
}

bool detect_refusal(std::string_view response_text) {
    static const RefusalDetector detector;
    return detector.detect(response_text);
}

}  // namespace groundcheck
