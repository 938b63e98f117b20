// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "groundcheck/benchgen.hpp"
#include "groundcheck/http_client.hpp"
#include "groundcheck/model.hpp"

namespace groundcheck {

enum class SegmentKind { SystemBase, FewShot, EvidenceBlock, Query, CitationInstr };
std::string_view to_string(SegmentKind kind);

struct PromptSegment {
    SegmentKind kind;
    std::string text;
    /// Mock-tokenizer ids of `text`.
    std::vector<std::uint32_t> token_ids;
};

struct AssembledPrompt {
    Variant variant = Variant::Citation;
    std::string record_id;
    /// Always in SystemBase, FewShot, EvidenceBlock, Query, CitationInstr order.
    std::vector<PromptSegment> segments;

    std::string text() const;
    std::vector<std::uint32_t> token_ids() const;
    /// Tokens before the citation-instruction segment.
    std::size_t base_token_count() const;
    /// Tokens of the citation-instruction segment (0 unless Citation).
    std::size_t citation_token_count() const;
};

/// Whitespace tokenizer with a stable string -> id hash (FNV-1a, top bit clear).
std::vector<std::uint32_t> mock_tokenize(std::string_view text);
std::uint32_t mock_token_id(std::string_view token);

/// Plain-text prompt templates. Placeholders: {{query}} in `query`,
/// {{evidence_block}} in `evidence`.
struct TemplateSet {
    std::string system_base;
    std::string few_shot;
    std::string evidence;
    std::string no_evidence;
    std::string query;
    std::string citation_instructions;

    static TemplateSet defaults();
    /// Reads system_base.txt, few_shot.txt, evidence.txt, no_evidence.txt,
    /// query.txt and citation_instructions.txt. Any missing file is an error.
    static TemplateSet load(const std::filesystem::path& directory);
};

/// Builds the prompt for `variant`. Guided adds few-shot examples to Vanilla;
/// Citation appends the citation instructions after everything Guided has, so
/// the Citation text always starts with the Guided text.
AssembledPrompt assemble(Variant variant, const QueryRecord& record, const TemplateSet& templates);

/// Produces a response for an assembled prompt.
class Generator {
public:
    virtual ~Generator() = default;
    virtual RawResponse generate(const AssembledPrompt& prompt) = 0;
};

/// POST {base}/generate {"prompt", "max_tokens"} -> {"text"}.
class RemoteGenerator final : public Generator {
public:
    explicit RemoteGenerator(RemoteEndpoint endpoint, int max_tokens = 512);
    RawResponse generate(const AssembledPrompt& prompt) override;
    HttpJsonClient& client() noexcept { return client_; }

private:
    HttpJsonClient client_;
    int max_tokens_;
};

/// Delegates to mock_generate_response for the record the prompt was built from.
class MockGenerator final : public Generator {
public:
    MockGenerator(const std::vector<BenchmarkRecord>& records, MockProfile profile);
    RawResponse generate(const AssembledPrompt& prompt) override;
    /// Planted counts of the last response generated for (id, variant).
    const TruthEntry& truth(const std::string& id, Variant variant) const;

private:
    std::map<std::string, const BenchmarkRecord*> records_;
    MockProfile profile_;
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, Variant>, TruthEntry> truth_;
};

}  // namespace groundcheck
