// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/judge.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "groundcheck/error.hpp"

namespace groundcheck {

using nlohmann::json;

std::string_view to_string(BackendKind kind) {
    return kind == BackendKind::RemoteLlm ? "remote" : "lexical";
}

namespace {

const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "a",     "an",    "the",   "and",   "or",    "but",   "if",    "of",    "to",    "in",    "on",
        "at",    "by",    "for",   "with",  "from",  "as",    "is",    "are",   "was",   "were",  "be",
        "been",  "being", "it",    "its",   "this",  "that",  "these", "those", "there", "their", "they",
        "them",  "he",    "she",   "his",   "her",   "we",    "our",   "you",   "your",  "i",     "me",
        "my",    "do",    "does",  "did",   "so",    "than",  "too",   "very",  "can",   "will",  "just",
        "about", "into",  "over",  "after", "before", "has",  "have",  "had",   "what",  "which", "who",
        "whom",  "how",   "when",  "where", "why",   "all",   "any",   "both",  "each",  "more",  "most",
        "other", "some",  "such",  "only",  "own",   "same",  "s",     "t",     "also",  "while", "then",
    };
    return words;
}

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (is_word_byte(c)) {
            current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string joined(const std::vector<std::string>& tokens) {
    std::string out = " ";
    for (const auto& t : tokens) {
        out += t;
        out += ' ';
    }
    return out;
}

std::string fill(std::string tmpl, std::string_view key, std::string_view value) {
    const std::string placeholder = fmt::format("{{{{{}}}}}", key);
    for (auto pos = tmpl.find(placeholder); pos != std::string::npos; pos = tmpl.find(placeholder, pos + value.size())) {
        tmpl.replace(pos, placeholder.size(), value);
    }
    return tmpl;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io(fmt::format("cannot read '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_reply(const std::string& body, std::string_view endpoint) {
    try {
        return json::parse(body);
    } catch (const json::parse_error&) {
        throw_backend(fmt::format("malformed reply from {}: not JSON", endpoint));
    }
}

constexpr std::string_view kDefaultNliTemplate =
    "You judge whether a premise entails a hypothesis. Answer with entails=true only when every fact in\n"
    "the hypothesis is stated or directly implied by the premise. Neutral and contradiction are both false.\n"
    "\n"
    "Premise: The running shoes have a wide toe box and run half a size small.\n"
    "Hypothesis: The shoes run small.\n"
    "entails: true\n"
    "\n"
    "Premise: The blender is loud but crushes ice easily.\n"
    "Hypothesis: The blender is quiet.\n"
    "entails: false\n"
    "\n"
    "Premise: {{premise}}\n"
    "Hypothesis: {{hypothesis}}\n"
    "entails:\n";

constexpr std::string_view kDefaultDecomposeTemplate =
    "Split the response into atomic factual claims, one per line. Drop citation markers like [1].\n"
    "\n"
    "Response: These boots are waterproof [1] and light, but the laces fray quickly [3].\n"
    "Claims:\n"
    "- The boots are waterproof.\n"
    "- The boots are light.\n"
    "- The laces fray quickly.\n"
    "\n"
    "Response: {{text}}\n"
    "Claims:\n";

}  // namespace

bool is_stopword(std::string_view token) { return stopwords().contains(token); }

std::vector<std::string> content_tokens(std::string_view text) {
    std::vector<std::string> tokens = word_tokens(text);
    std::erase_if(tokens, [](const std::string& t) { return is_stopword(t); });
    return tokens;
}

bool LexicalOracle::entails(std::string_view premise, std::string_view hypothesis) {
    auto premise_words = word_tokens(premise);
    auto hypothesis_words = word_tokens(hypothesis);
    if (!hypothesis_words.empty() && joined(premise_words).find(joined(hypothesis_words)) != std::string::npos) {
        return true;
    }
    auto hyp = content_tokens(hypothesis);
    if (hyp.empty()) return false;
    std::unordered_set<std::string> premise_set;
    for (auto& w : premise_words) {
        if (!is_stopword(w)) premise_set.insert(std::move(w));
    }
    auto matched = std::count_if(hyp.begin(), hyp.end(), [&](const std::string& t) { return premise_set.contains(t); });
    // matched / |hyp| >= 0.8, in integers.
    return 5 * static_cast<std::size_t>(matched) >= 4 * hyp.size();
}

bool LexicalOracle::nli(std::string_view premise, std::string_view hypothesis) { return entails(premise, hypothesis); }

std::vector<Claim> LexicalOracle::decompose(std::string_view response_text) {
    std::vector<Claim> claims;
    std::size_t index = 0;
    for (const SentenceSegment& seg : segment_sentences(response_text)) {
        ParsedCitations pc = parse_citations(seg.text, 0);
        if (!pc.clean_text.empty()) claims.push_back(Claim{std::move(pc.clean_text), index});
        ++index;
    }
    return claims;
}

JudgePromptTemplates JudgePromptTemplates::defaults() {
    return JudgePromptTemplates{std::string(kDefaultNliTemplate), std::string(kDefaultDecomposeTemplate)};
}

JudgePromptTemplates JudgePromptTemplates::load(const std::filesystem::path& directory) {
    return JudgePromptTemplates{read_file(directory / "nli.txt"), read_file(directory / "decompose.txt")};
}

RemoteLlmJudge::RemoteLlmJudge(RemoteEndpoint endpoint, JudgePromptTemplates templates)
    : client_([&] {
          if (endpoint.base_url.empty()) throw_validation("remote judge requires an endpoint URL (GROUNDCHECK_JUDGE_URL)");
          if (endpoint.token.empty()) throw_validation("remote judge requires a credential (GROUNDCHECK_JUDGE_TOKEN)");
          return std::move(endpoint);
      }()),
      templates_(std::move(templates)) {}

bool RemoteLlmJudge::nli(std::string_view premise, std::string_view hypothesis) {
    json body = {{"premise", premise},
                 {"hypothesis", hypothesis},
                 {"prompt", fill(fill(templates_.nli, "premise", premise), "hypothesis", hypothesis)}};
    json reply = parse_reply(client_.post("/nli", body.dump()), "/nli");
    auto it = reply.find("entails");
    if (!reply.is_object() || it == reply.end() || !it->is_boolean()) {
        throw_backend("malformed reply from /nli: expected {\"entails\": bool}");
    }
    return it->get<bool>();
}

std::vector<Claim> RemoteLlmJudge::decompose(std::string_view response_text) {
    json body = {{"text", response_text}, {"prompt", fill(templates_.decompose, "text", response_text)}};
    json reply = parse_reply(client_.post("/decompose", body.dump()), "/decompose");
    auto it = reply.find("claims");
    if (!reply.is_object() || it == reply.end() || !it->is_array()) {
        throw_backend("malformed reply from /decompose: expected {\"claims\": [str]}");
    }
    std::vector<Claim> claims;
    for (const json& c : *it) {
        if (!c.is_string()) throw_backend("malformed reply from /decompose: claim is not a string");
        auto text = c.get<std::string>();
        if (!text.empty()) claims.push_back(Claim{std::move(text), std::nullopt});
    }
    return claims;
}

Judge::Judge(std::shared_ptr<JudgeBackend> backend, JudgeOptions options)
    : backend_(std::move(backend)),
      options_(options),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options.max_in_flight, 1, 1024))) {
    if (!backend_) throw_validation("judge requires a backend");
}

EntailmentVerdict Judge::entails(std::string_view premise, std::string_view hypothesis) {
    if (premise.empty()) throw_validation("entails: premise must be non-empty");
    if (hypothesis.empty()) throw_validation("entails: hypothesis must be non-empty");
    entails_calls_.fetch_add(1, std::memory_order_relaxed);

    std::string key;
    if (options_.memoize) {
        key.reserve(premise.size() + hypothesis.size() + 1);
        key.append(premise).push_back('\0');
        key.append(hypothesis);
        std::shared_lock lock(cache_mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return EntailmentVerdict{it->second, kind(), true};
    }

    in_flight_.acquire();
    bool verdict = false;
    try {
        backend_calls_.fetch_add(1, std::memory_order_relaxed);
        verdict = backend_->nli(premise, hypothesis);
    } catch (...) {
        in_flight_.release();
        throw;
    }
    in_flight_.release();

    if (options_.memoize) {
        std::unique_lock lock(cache_mutex_);
        cache_.emplace(std::move(key), verdict);
    }
    return EntailmentVerdict{verdict, kind(), false};
}

std::vector<Claim> Judge::decompose_claims(std::string_view response_text) {
    if (response_text.find_first_not_of(" \t\r\n") == std::string_view::npos) return {};
    in_flight_.acquire();
    try {
        auto claims = backend_->decompose(response_text);
        in_flight_.release();
        return claims;
    } catch (...) {
        in_flight_.release();
        throw;
    }
}

std::size_t Judge::cache_size() const {
    std::shared_lock lock(cache_mutex_);
    return cache_.size();
}

void Judge::clear_cache() {
    std::unique_lock lock(cache_mutex_);
    cache_.clear();
}

std::unique_ptr<Judge> make_lexical_judge(JudgeOptions options) {
    return std::make_unique<Judge>(std::make_shared<LexicalOracle>(), options);
}

ParsedResponse posthoc_annotate(const ParsedResponse& parsed, const EvidenceSet& evidence_set, Judge& judge) {
    for (const Sentence& s : parsed.sentences) {
        if (s.has_citations()) throw_validation("posthoc_annotate: response already carries citations");
    }
    ParsedResponse annotated = parsed;
    for (Sentence& s : annotated.sentences) {
        if (s.text.empty()) continue;
        for (const Evidence& e : evidence_set) {
            if (judge.entails(e.text, s.text).entails) s.citations.push_back(CitationRef{e.index, true});
        }
    }
    return annotated;
}

}  // namespace groundcheck
