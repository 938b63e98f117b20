// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "groundcheck/metrics.hpp"
#include "groundcheck/model.hpp"

namespace groundcheck {

/// Query used for every record of the all-relevant benchmark shape.
inline constexpr std::string_view kSyntheticQuery = "What do customers say about the pros and cons?";

struct ProductAttribute {
    std::string name;                 // one or two words
    std::vector<std::string> values;  // single words
};

/// A product family with its own vocabulary. Pools of different archetypes
/// must not share words.
struct ProductArchetype {
    std::string product;  // one or two words
    std::vector<ProductAttribute> attributes;
    std::vector<std::string> contexts;  // single words
};

/// The built-in 10-archetype vocabulary.
const std::vector<ProductArchetype>& default_product_vocabulary();

enum class BenchmarkShape { Synthetic, Noisy };
std::string_view to_string(BenchmarkShape shape);
BenchmarkShape parse_benchmark_shape(std::string_view text);

struct GeneratorConfig {
    std::uint64_t seed = 7;
    std::int64_t n_records = 200;
    std::int64_t evidences_per_record = 24;
    double relevance_rate = 0.411;
    std::vector<ProductArchetype> product_vocabulary = default_product_vocabulary();

    void validate() const;
};

/// Knobs of the offline response generator.
struct MockKnobs {
    /// Share of sentences that restate a relevant evidence.
    double grounded_fraction = 0.8;
    /// Share of grounded sentences citing their source (Citation variant only).
    double cite_fraction = 1.0;
    /// Share of cited sentences that also cite an unrelated valid evidence.
    double miscite_fraction = 0.0;
    /// Share of ungrounded sentences citing an unrelated valid evidence.
    double false_cite_fraction = 0.0;
    /// Share of cited sentences that also cite an out-of-range index.
    double plant_invalid = 0.0;
    std::int64_t sentences = 6;
    /// Emit a single refusal sentence when no evidence is gold-relevant.
    bool refusal_on_empty = false;

    void validate() const;
};

/// Per-variant knobs. Defaults order grounding Vanilla < Guided < Citation.
/// Sets one knob by its JSON name, e.g. ("cite_fraction", "0.5"). Validates the result.
void set_mock_knob(MockKnobs& knobs, std::string_view key, std::string_view value);

struct MockProfile {
    std::uint64_t seed = 7;
    std::map<Variant, MockKnobs> knobs = defaults();

    static std::map<Variant, MockKnobs> defaults();
    const MockKnobs& for_variant(Variant variant) const;
};

/// Ground-truth counts of one mock response, as the lexical oracle must see them.
struct TruthEntry {
    std::string id;
    Variant variant = Variant::Citation;
    ResponseCounts counts;
    bool refusal = false;

    friend bool operator==(const TruthEntry&, const TruthEntry&) = default;
};

struct MockResponse {
    RawResponse response;
    TruthEntry truth;
};

struct GeneratedCorpus {
    std::vector<BenchmarkRecord> records;
    /// Sorted by id, then variant.
    std::vector<TruthEntry> truth;
};

/// All-relevant shape: fixed query, review evidences only.
std::vector<BenchmarkRecord> gen_synthetic(const GeneratorConfig& config);
/// Noisy shape: templated queries, each evidence relevant with probability
/// relevance_rate; irrelevant ones describe a different archetype.
std::vector<BenchmarkRecord> gen_noisy(const GeneratorConfig& config);
std::vector<BenchmarkRecord> generate_records(const GeneratorConfig& config, BenchmarkShape shape);

/// Offline stand-in for the answering model. Pure in (record, variant, knobs, seed).
MockResponse mock_generate_response(const BenchmarkRecord& record, Variant variant, const MockKnobs& knobs,
                                    std::uint64_t seed);

/// Fills `variants` responses of every record and returns their truth.
std::vector<TruthEntry> attach_mock_responses(std::vector<BenchmarkRecord>& records, const MockProfile& profile,
                                              const std::vector<Variant>& variants);

GeneratedCorpus generate_corpus(const GeneratorConfig& config, BenchmarkShape shape, const MockProfile& profile,
                                const std::vector<Variant>& variants);

/// Realized share of gold-relevant evidences (evidences without a label are skipped).
double realized_relevance(const std::vector<BenchmarkRecord>& records);

/// Sidecar path for a benchmark file: bench.jsonl -> bench.truth.jsonl.
std::filesystem::path truth_path_for(const std::filesystem::path& benchmark_path);
void save_truth(const std::vector<TruthEntry>& truth, const std::filesystem::path& path);
std::vector<TruthEntry> load_truth(const std::filesystem::path& path);

/// Reads a JSON config: {"seed", "n_records", "evidences_per_record",
/// "relevance_rate", "products": [...], "mock": {"citation": {...}, ...}}.
/// Absent keys keep the defaults already in `config` / `profile`.
void load_generator_config(const std::filesystem::path& path, GeneratorConfig& config, MockProfile& profile);

}  // namespace groundcheck
