// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "groundcheck/citation_parser.hpp"
#include "groundcheck/http_client.hpp"
#include "groundcheck/model.hpp"

namespace groundcheck {

/// An atomic factual statement taken from a response.
struct Claim {
    std::string text;
    std::optional<std::size_t> source_sentence_index;

    friend bool operator==(const Claim&, const Claim&) = default;
};

enum class BackendKind { RemoteLlm, LexicalOracle };
std::string_view to_string(BackendKind kind);

struct EntailmentVerdict {
    bool entails = false;
    BackendKind backend = BackendKind::LexicalOracle;
    bool cached = false;
};

/// The entailment predicate and claim decomposer behind a Judge.
class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;
    virtual BackendKind kind() const = 0;
    /// Does `premise` entail `hypothesis`? Neutral and contradiction both map to false.
    virtual bool nli(std::string_view premise, std::string_view hypothesis) = 0;
    virtual std::vector<Claim> decompose(std::string_view response_text) = 0;
};

/// Lowercased alphanumeric tokens of `text` with stopwords removed. Bytes
/// outside ASCII are kept as word characters.
std::vector<std::string> content_tokens(std::string_view text);
bool is_stopword(std::string_view token);

/// Deterministic token-overlap entailment.
///
/// entails iff the normalized hypothesis is a substring of the normalized
/// premise, or at least 80% of the hypothesis content tokens (counted with
/// multiplicity) occur in the premise. A hypothesis without content tokens
/// only entails through the substring rule. Decomposition yields one claim
/// per sentence with citation markers stripped.
class LexicalOracle final : public JudgeBackend {
public:
    BackendKind kind() const override { return BackendKind::LexicalOracle; }
    bool nli(std::string_view premise, std::string_view hypothesis) override;
    std::vector<Claim> decompose(std::string_view response_text) override;

    static bool entails(std::string_view premise, std::string_view hypothesis);
};

/// Prompt templates sent alongside remote judge requests.
struct JudgePromptTemplates {
    /// Placeholders: {{premise}}, {{hypothesis}}.
    std::string nli;
    /// Placeholder: {{text}}.
    std::string decompose;

    static JudgePromptTemplates defaults();
    /// Loads nli.txt and decompose.txt from `directory`.
    static JudgePromptTemplates load(const std::filesystem::path& directory);
};

/// LLM judge behind the HTTP contract:
///   POST {base}/nli        {"premise", "hypothesis", "prompt"} -> {"entails": bool}
///   POST {base}/decompose  {"text", "prompt"}                  -> {"claims": [str]}
class RemoteLlmJudge final : public JudgeBackend {
public:
    /// Requires a base URL and a credential.
    explicit RemoteLlmJudge(RemoteEndpoint endpoint, JudgePromptTemplates templates = JudgePromptTemplates::defaults());

    BackendKind kind() const override { return BackendKind::RemoteLlm; }
    bool nli(std::string_view premise, std::string_view hypothesis) override;
    std::vector<Claim> decompose(std::string_view response_text) override;

    HttpJsonClient& client() noexcept { return client_; }

private:
    HttpJsonClient client_;
    JudgePromptTemplates templates_;
};

struct JudgeOptions {
    bool memoize = true;
    /// Maximum concurrent backend calls.
    std::size_t max_in_flight = 8;
};

/// Front end over a backend: argument checks, the (premise, hypothesis) memo
/// cache and the in-flight bound. Safe to share between worker threads.
class Judge {
public:
    explicit Judge(std::shared_ptr<JudgeBackend> backend, JudgeOptions options = {});
    Judge(const Judge&) = delete;
    Judge& operator=(const Judge&) = delete;

    /// Throws Validation on empty arguments; backend errors propagate.
    EntailmentVerdict entails(std::string_view premise, std::string_view hypothesis);
    std::vector<Claim> decompose_claims(std::string_view response_text);

    BackendKind kind() const { return backend_->kind(); }
    std::uint64_t entails_calls() const noexcept { return entails_calls_.load(); }
    std::uint64_t backend_calls() const noexcept { return backend_calls_.load(); }
    std::size_t cache_size() const;
    void clear_cache();

private:
    std::shared_ptr<JudgeBackend> backend_;
    JudgeOptions options_;
    std::counting_semaphore<1024> in_flight_;
    mutable std::shared_mutex cache_mutex_;
    std::unordered_map<std::string, bool> cache_;
    std::atomic<std::uint64_t> entails_calls_{0};
    std::atomic<std::uint64_t> backend_calls_{0};
};

std::unique_ptr<Judge> make_lexical_judge(JudgeOptions options = {});

/// Attaches citation e to sentence s iff the evidence entails the sentence.
/// Requires a response without citations; text is left untouched.
ParsedResponse posthoc_annotate(const ParsedResponse& parsed, const EvidenceSet& evidence_set, Judge& judge);

}  // namespace groundcheck
