// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/prompt.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "groundcheck/error.hpp"
#include "groundcheck/rng.hpp"

namespace groundcheck {

using nlohmann::json;

std::string_view to_string(SegmentKind kind) {
    switch (kind) {
        case SegmentKind::SystemBase: return "system_base";
        case SegmentKind::FewShot: return "few_shot";
        case SegmentKind::EvidenceBlock: return "evidence_block";
        case SegmentKind::Query: return "query";
        case SegmentKind::CitationInstr: return "citation_instructions";
    }
    return "system_base";
}

std::uint32_t mock_token_id(std::string_view token) {
    return static_cast<std::uint32_t>(fnv1a64(token) & 0x7FFFFFFFu);
}

std::vector<std::uint32_t> mock_tokenize(std::string_view text) {
    std::vector<std::uint32_t> ids;
    std::size_t i = 0;
    auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (i < text.size()) {
        while (i < text.size() && is_ws(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_ws(text[i])) ++i;
        if (i > start) ids.push_back(mock_token_id(text.substr(start, i - start)));
    }
    return ids;
}

std::string AssembledPrompt::text() const {
    std::string out;
    for (const PromptSegment& s : segments) out += s.text;
    return out;
}

std::vector<std::uint32_t> AssembledPrompt::token_ids() const {
    std::vector<std::uint32_t> ids;
    for (const PromptSegment& s : segments) ids.insert(ids.end(), s.token_ids.begin(), s.token_ids.end());
    return ids;
}

std::size_t AssembledPrompt::base_token_count() const {
    std::size_t n = 0;
    for (const PromptSegment& s : segments) {
        if (s.kind != SegmentKind::CitationInstr) n += s.token_ids.size();
    }
    return n;
}

std::size_t AssembledPrompt::citation_token_count() const {
    std::size_t n = 0;
    for (const PromptSegment& s : segments) {
        if (s.kind == SegmentKind::CitationInstr) n += s.token_ids.size();
    }
    return n;
}

TemplateSet TemplateSet::defaults() {
    TemplateSet t;
    t.system_base =
        "You are a shopping assistant. Answer the customer's question using only the retrieved product information "
        "below.\n";
    t.few_shot =
        "Keep answers short and specific to the product. Mention both strengths and weaknesses when the evidence "
        "shows them.\n"
        "\n"
        "Example question: Is the water bottle easy to clean?\n"
        "Example answer: Most buyers say the wide mouth makes it easy to clean by hand. A few mention the lid gasket "
        "traps residue.\n";
    t.evidence = "Retrieved evidence:\n{{evidence_block}}\n";
    t.no_evidence = "Retrieved evidence: none available.\n";
    t.query = "Customer question: {{query}}\n";
    t.citation_instructions =
        "Cite the evidence that supports each sentence by appending its number in square brackets, for example [2] "
        "or [1][3]. Only cite evidence that states the fact. If none of the evidence answers the question, say that "
        "the reviews do not provide information about it instead of guessing.\n";
    return t;
}

namespace {

std::string read_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io(fmt::format("missing template file '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string substitute(std::string text, std::string_view key, std::string_view value) {
    const std::string placeholder = fmt::format("{{{{{}}}}}", key);
    for (auto pos = text.find(placeholder); pos != std::string::npos; pos = text.find(placeholder, pos + value.size())) {
        text.replace(pos, placeholder.size(), value);
    }
    return text;
}

// Segments end in a newline so that tokenizing the concatenation equals
// concatenating per-segment tokens.
PromptSegment make_segment(SegmentKind kind, std::string text) {
    if (text.empty() || text.back() != '\n') text.push_back('\n');
    PromptSegment segment{kind, std::move(text), {}};
    segment.token_ids = mock_tokenize(segment.text);
    return segment;
}

}  // namespace

TemplateSet TemplateSet::load(const std::filesystem::path& directory) {
    TemplateSet t;
    t.system_base = read_template(directory / "system_base.txt");
    t.few_shot = read_template(directory / "few_shot.txt");
    t.evidence = read_template(directory / "evidence.txt");
    t.no_evidence = read_template(directory / "no_evidence.txt");
    t.query = read_template(directory / "query.txt");
    t.citation_instructions = read_template(directory / "citation_instructions.txt");
    return t;
}

AssembledPrompt assemble(Variant variant, const QueryRecord& record, const TemplateSet& templates) {
    AssembledPrompt prompt;
    prompt.variant = variant;
    prompt.record_id = record.id;
    prompt.segments.push_back(make_segment(SegmentKind::SystemBase, templates.system_base));
    if (variant != Variant::Vanilla) prompt.segments.push_back(make_segment(SegmentKind::FewShot, templates.few_shot));

    if (record.evidence_set.empty()) {
        prompt.segments.push_back(make_segment(SegmentKind::EvidenceBlock, templates.no_evidence));
    } else {
        std::string block;
        for (const Evidence& e : record.evidence_set) block += fmt::format("[{}] {}\n", e.index, e.text);
        block.pop_back();
        prompt.segments.push_back(
            make_segment(SegmentKind::EvidenceBlock, substitute(templates.evidence, "evidence_block", block)));
    }
    prompt.segments.push_back(make_segment(SegmentKind::Query, substitute(templates.query, "query", record.query)));
    if (variant == Variant::Citation) {
        prompt.segments.push_back(make_segment(SegmentKind::CitationInstr, templates.citation_instructions));
    }
    return prompt;
}

RemoteGenerator::RemoteGenerator(RemoteEndpoint endpoint, int max_tokens)
    : client_([&] {
          if (endpoint.base_url.empty()) throw_validation("remote generator requires an endpoint URL (GROUNDCHECK_GEN_URL)");
          if (endpoint.token.empty()) throw_validation("remote generator requires a credential (GROUNDCHECK_GEN_TOKEN)");
          return std::move(endpoint);
      }()),
      max_tokens_(max_tokens) {}

RawResponse RemoteGenerator::generate(const AssembledPrompt& prompt) {
    json body = {{"prompt", prompt.text()}, {"max_tokens", max_tokens_}};
    std::string reply_text = client_.post("/generate", body.dump());
    json reply;
    try {
        reply = json::parse(reply_text);
    } catch (const json::parse_error&) {
        throw_backend("malformed reply from /generate: not JSON");
    }
    auto it = reply.find("text");
    if (!reply.is_object() || it == reply.end() || !it->is_string()) {
        throw_backend("malformed reply from /generate: expected {\"text\": str}");
    }
    return RawResponse{it->get<std::string>(), prompt.variant};
}

MockGenerator::MockGenerator(const std::vector<BenchmarkRecord>& records, MockProfile profile)
    : profile_(std::move(profile)) {
    for (const BenchmarkRecord& r : records) records_[r.id()] = &r;
}

RawResponse MockGenerator::generate(const AssembledPrompt& prompt) {
    auto it = records_.find(prompt.record_id);
    if (it == records_.end()) throw_validation(fmt::format("mock generator has no record '{}'", prompt.record_id));
    MockResponse mock =
        mock_generate_response(*it->second, prompt.variant, profile_.for_variant(prompt.variant), profile_.seed);
    std::lock_guard lock(mutex_);
    truth_[{prompt.record_id, prompt.variant}] = mock.truth;
    return mock.response;
}

const TruthEntry& MockGenerator::truth(const std::string& id, Variant variant) const {
    std::lock_guard lock(mutex_);
    auto it = truth_.find({id, variant});
    if (it == truth_.end()) throw_validation(fmt::format("no mock response generated for '{}'", id));
    return it->second;
}

}  // namespace groundcheck
