// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace groundcheck {

class Judge;

/// Flags responses that decline to answer for lack of evidence, e.g.
/// "The reviews do not provide information about ...".
class RefusalDetector {
public:
    /// Uses default_patterns().
    RefusalDetector();
    explicit RefusalDetector(std::vector<std::string> patterns);

    /// One pattern per line; blank lines and `#` comments are ignored.
    static RefusalDetector from_file(const std::filesystem::path& path);
    static const std::vector<std::string>& default_patterns();

    /// True iff some sentence contains a pattern, case-insensitively.
    bool detect(std::string_view response_text) const;
    /// As above, and additionally asks the judge whether a sentence entails
    /// a generic statement that the information is unavailable.
    bool detect(std::string_view response_text, Judge& judge) const;

    const std::vector<std::string>& patterns() const noexcept { return patterns_; }

private:
    bool sentence_matches(std::string_view sentence) const;
    std::vector<std::string> patterns_;
};

bool detect_refusal(std::string_view response_text);

}  // namespace groundcheck
