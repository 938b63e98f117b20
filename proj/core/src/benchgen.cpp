// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/benchgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "groundcheck/error.hpp"
#include "groundcheck/rng.hpp"

namespace groundcheck {

using nlohmann::json;

namespace {

// Stream purposes; see Rng::stream.
constexpr std::uint64_t kRecordStream = 1;
constexpr std::uint64_t kMockStream = 100;

const std::vector<std::string> kSyllables = {"za", "ze", "zi", "zo", "zu", "ka", "ke", "ki",
                                             "ko", "ku", "xa", "xe", "xi", "xo", "xu", "va"};

// Four syllables, bijective on the low 16 bits of `code`.
std::string pseudo_word(std::uint64_t code) {
    std::string word;
    for (int shift = 12; shift >= 0; shift -= 4) word += kSyllables[(code >> shift) & 0xF];
    return word;
}

std::string_view opener(EvidenceKind kind) {
    switch (kind) {
        case EvidenceKind::CustomerReview: return "A verified buyer wrote that";
        case EvidenceKind::ProductDescription: return "Listing details state that";
        case EvidenceKind::QnA: return "Asked by a shopper, the seller confirmed that";
    }
    return "";
}

const std::vector<std::string> kFillerSubjects = {"Our neighbor",       "The weather forecast", "My cousin",
                                                  "The parade committee", "A marching band",    "The town library"};
const std::vector<std::string> kFillerVerbs = {"mentioned", "celebrated", "postponed", "painted", "rehearsed", "ignored"};
const std::vector<std::string> kFillerObjects = {"a lighthouse",    "several penguins",  "the orchestra",
                                                 "purple umbrellas", "an antique globe", "the carnival"};
const std::vector<std::string> kFillerTails = {"yesterday", "last winter", "downtown", "at midnight", "in autumn",
                                               "overseas"};

const std::vector<std::string> kNoisyQueryTemplates = {
    "How is the {attribute} of the {product}?",
    "Does the {product} hold up for {context}?",
    "What do buyers think about the {attribute}?",
    "Is the {attribute} worth it on this {product}?",
};

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
        text.replace(pos, key.size(), value);
    }
    return text;
}

std::size_t word_count(std::string_view s) {
    std::size_t count = 0;
    bool in_word = false;
    for (char c : s) {
        bool space = c == ' ';
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

// "the {product} {attribute} felt {value} on {pw} {pw} {context}"
std::string evidence_core(const ProductArchetype& archetype, Rng& rng, std::uint64_t pseudo_base, int index) {
    const ProductAttribute& attribute = rng.pick(archetype.attributes);
    const std::string& value = rng.pick(attribute.values);
    const std::string& context = rng.pick(archetype.contexts);
    std::uint64_t code = pseudo_base + 2 * static_cast<std::uint64_t>(index);
    return fmt::format("the {} {} felt {} on {} {} {}", archetype.product, attribute.name, value, pseudo_word(code),
                       pseudo_word(code + 1), context);
}

std::size_t round_share(double fraction, std::size_t total) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total) + 0.5));
}

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

// The clause a grounded sentence repeats: the evidence text after its opener.
std::string restatement(const Evidence& e) {
    std::string_view text = e.text;
    if (auto pos = text.find(" that the "); pos != std::string_view::npos) text = text.substr(pos + 6);
    while (!text.empty() && (text.back() == '.' || text.back() == '!' || text.back() == '?' || text.back() == ' ')) {
        text.remove_suffix(1);
    }
    return capitalize(std::string(text));
}

std::string format_markers(const std::vector<std::int64_t>& indices, bool comma_list) {
    if (indices.empty()) return "";
    if (comma_list) {
        std::string out = "[";
        for (std::size_t i = 0; i < indices.size(); ++i) out += (i ? ", " : "") + std::to_string(indices[i]);
        return out + "]";
    }
    std::string out;
    for (auto idx : indices) out += fmt::format("[{}]", idx);
    return out;
}

std::string refusal_topic(const BenchmarkRecord& record) {
    // Noisy queries name an attribute; the fixed synthetic query does not.
    const std::string& q = record.query_record.query;
    for (std::string_view lead : {"How is the ", "What do buyers think about the ", "Is the "}) {
        if (q.starts_with(lead)) {
            auto rest = q.substr(lead.size());
            auto stop = rest.find_first_of(" ?");
            if (lead == "How is the ") stop = rest.find(" of the ");
            if (lead == "Is the ") stop = rest.find(" worth");
            if (stop != std::string::npos) return rest.substr(0, stop);
        }
    }
    return "this product";
}

void knobs_from_json(const json& j, MockKnobs& k) {
    k.grounded_fraction = j.value("grounded_fraction", k.grounded_fraction);
    k.cite_fraction = j.value("cite_fraction", k.cite_fraction);
    k.miscite_fraction = j.value("miscite_fraction", k.miscite_fraction);
    k.false_cite_fraction = j.value("false_cite_fraction", k.false_cite_fraction);
    k.plant_invalid = j.value("plant_invalid", k.plant_invalid);
    k.sentences = j.value("sentences", k.sentences);
    k.refusal_on_empty = j.value("refusal_on_empty", k.refusal_on_empty);
}

}  // namespace

void set_mock_knob(MockKnobs& knobs, std::string_view key, std::string_view value) {
    auto number = [&] {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || ptr != value.data() + value.size()) {
            throw_validation(fmt::format("mock knob {}: '{}' is not a number", key, value));
        }
        return v;
    };
    if (key == "grounded_fraction") {
        knobs.grounded_fraction = number();
    } else if (key == "cite_fraction") {
        knobs.cite_fraction = number();
    } else if (key == "miscite_fraction") {
        knobs.miscite_fraction = number();
    } else if (key == "false_cite_fraction") {
        knobs.false_cite_fraction = number();
    } else if (key == "plant_invalid") {
        knobs.plant_invalid = number();
    } else if (key == "sentences") {
        double v = number();
        if (v != static_cast<double>(static_cast<std::int64_t>(v))) throw_validation("mock knob sentences must be an integer");
        knobs.sentences = static_cast<std::int64_t>(v);
    } else if (key == "refusal_on_empty") {
        if (value == "true" || value == "1") {
            knobs.refusal_on_empty = true;
        } else if (value == "false" || value == "0") {
            knobs.refusal_on_empty = false;
        } else {
            throw_validation(fmt::format("mock knob refusal_on_empty: '{}' is not a boolean", value));
        }
    } else {
        throw_validation(fmt::format("unknown mock knob '{}'", key));
    }
    knobs.validate();
}

const std::vector<ProductArchetype>& default_product_vocabulary() {
    static const std::vector<ProductArchetype> vocabulary = {
        {"trail runner",
         {{"grip", {"tenacious", "slippery", "sticky", "dependable"}},
          {"cushioning", {"plush", "firm", "springy", "thin"}},
          {"toe box", {"roomy", "cramped", "narrow", "generous"}}},
         {"hikes", "marathons", "scrambles"}},
        {"espresso machine",
         {{"crema", {"velvety", "watery", "thick", "bitter"}},
          {"steam wand", {"powerful", "weak", "sputtering", "precise"}},
          {"reservoir", {"leaky", "spacious", "removable", "tiny"}}},
         {"mornings", "brunches", "parties"}},
        {"studio headphones",
         {{"bass", {"punchy", "muddy", "booming", "balanced"}},
          {"earcups", {"comfy", "sweaty", "snug", "stiff"}},
          {"battery", {"longlasting", "draining", "reliable", "unpredictable"}}},
         {"flights", "commutes", "workouts"}},
        {"camping tent",
         {{"rainfly", {"waterproof", "flimsy", "taut", "saggy"}},
          {"zipper", {"smooth", "jammed", "sturdy", "fragile"}},
          {"floor", {"durable", "torn", "rugged", "slick"}}},
         {"storms", "festivals", "expeditions"}},
        {"robot vacuum",
         {{"suction", {"strong", "feeble", "relentless", "mediocre"}},
          {"navigation", {"clever", "clumsy", "erratic", "methodical"}},
          {"dustbin", {"small", "overflowing", "huge", "cumbersome"}}},
         {"carpets", "hallways", "kitchens"}},
        {"chef knife",
         {{"edge", {"razor", "dull", "keen", "chipped"}},
          {"handle", {"ergonomic", "awkward", "grippy", "wobbly"}},
          {"steel", {"hardened", "rusty", "gleaming", "brittle"}}},
         {"dinners", "prep", "butchery"}},
        {"yoga mat",
         {{"thickness", {"cushy", "skimpy", "substantial", "meager"}},
          {"texture", {"tacky", "gritty", "silky", "coarse"}},
          {"odor", {"rubbery", "faint", "pungent", "neutral"}}},
         {"classes", "stretches", "retreats"}},
        {"gaming laptop",
         {{"keyboard", {"clicky", "mushy", "luminous", "responsive"}},
          {"display", {"vivid", "dim", "crisp", "washed"}},
          {"fans", {"whisper", "roaring", "whiny", "constant"}}},
         {"tournaments", "livestreams", "raids"}},
        {"stand mixer",
         {{"motor", {"torquey", "struggling", "mighty", "overheating"}},
          {"bowl", {"capacious", "shallow", "dented", "polished"}},
          {"attachments", {"versatile", "limited", "interchangeable", "bent"}}},
         {"baking", "doughs", "holidays"}},
        {"electric toothbrush",
         {{"bristles", {"soft", "harsh", "frayed", "gentle"}},
          {"charge", {"enduring", "fleeting", "steady", "sluggish"}},
          {"timer", {"helpful", "annoying", "accurate", "silent"}}},
         {"travel", "checkups", "bedtime"}},
    };
    return vocabulary;
}

std::string_view to_string(BenchmarkShape shape) { return shape == BenchmarkShape::Synthetic ? "synthetic" : "noisy"; }

BenchmarkShape parse_benchmark_shape(std::string_view text) {
    if (text == "synthetic") return BenchmarkShape::Synthetic;
    if (text == "noisy") return BenchmarkShape::Noisy;
    throw_validation(fmt::format("unknown benchmark shape '{}'", text));
}

void GeneratorConfig::validate() const {
    if (n_records < 0) throw_validation("n_records must be >= 0");
    if (evidences_per_record < 0) throw_validation("evidences_per_record must be >= 0");
    if (evidences_per_record > 32768) throw_validation("evidences_per_record must be <= 32768");
    if (!(relevance_rate >= 0.0 && relevance_rate <= 1.0)) throw_validation("relevance_rate must be in [0, 1]");
    if (product_vocabulary.empty()) throw_validation("product_vocabulary must not be empty");
    for (const ProductArchetype& a : product_vocabulary) {
        auto words = word_count(a.product);
        if (words < 1 || words > 2) throw_validation(fmt::format("product '{}' must be one or two words", a.product));
        if (a.attributes.empty() || a.contexts.empty()) {
            throw_validation(fmt::format("product '{}' needs attributes and contexts", a.product));
        }
        for (const ProductAttribute& attr : a.attributes) {
            auto n = word_count(attr.name);
            if (n < 1 || n > 2) throw_validation(fmt::format("attribute '{}' must be one or two words", attr.name));
            if (attr.values.empty()) throw_validation(fmt::format("attribute '{}' has no values", attr.name));
            for (const auto& v : attr.values) {
                if (word_count(v) != 1) throw_validation(fmt::format("value '{}' must be a single word", v));
            }
        }
        for (const auto& c : a.contexts) {
            if (word_count(c) != 1) throw_validation(fmt::format("context '{}' must be a single word", c));
        }
    }
}

void MockKnobs::validate() const {
    for (double f : {grounded_fraction, cite_fraction, miscite_fraction, false_cite_fraction, plant_invalid}) {
        if (!(f >= 0.0 && f <= 1.0)) throw_validation("mock knob fractions must be in [0, 1]");
    }
    if (sentences < 1) throw_validation("mock sentences must be >= 1");
}

std::map<Variant, MockKnobs> MockProfile::defaults() {
    MockKnobs vanilla;
    vanilla.grounded_fraction = 0.5;
    vanilla.cite_fraction = 0.0;
    MockKnobs guided;
    guided.grounded_fraction = 0.65;
    guided.cite_fraction = 0.0;
    MockKnobs citation;
    citation.grounded_fraction = 0.85;
    citation.cite_fraction = 0.9;
    citation.miscite_fraction = 0.15;
    citation.false_cite_fraction = 0.1;
    citation.refusal_on_empty = true;
    return {{Variant::Vanilla, vanilla}, {Variant::Guided, guided}, {Variant::Citation, citation}};
}

const MockKnobs& MockProfile::for_variant(Variant variant) const {
    auto it = knobs.find(variant);
    if (it == knobs.end()) throw_validation(fmt::format("no mock knobs for variant {}", to_string(variant)));
    return it->second;
}

namespace {

BenchmarkRecord make_record(const GeneratorConfig& config, BenchmarkShape shape, std::int64_t index) {
    Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(index), kRecordStream);
    const auto& vocab = config.product_vocabulary;
    const std::size_t product = static_cast<std::size_t>(rng.below(vocab.size()));
    const ProductArchetype& archetype = vocab[product];
    const std::uint64_t pseudo_base = rng.next() & 0xFFFF;
    const double relevance = shape == BenchmarkShape::Synthetic ? 1.0 : config.relevance_rate;

    BenchmarkRecord record;
    QueryRecord& q = record.query_record;
    q.id = fmt::format("{}-{:06d}", shape == BenchmarkShape::Synthetic ? "syn" : "noisy", index + 1);
    if (shape == BenchmarkShape::Synthetic) {
        q.query = std::string(kSyntheticQuery);
    } else {
        std::string tmpl = rng.pick(kNoisyQueryTemplates);
        tmpl = replace_all(tmpl, "{attribute}", rng.pick(archetype.attributes).name);
        tmpl = replace_all(tmpl, "{context}", rng.pick(archetype.contexts));
        q.query = replace_all(tmpl, "{product}", archetype.product);
    }

    // Randomized rounding of the relevant count, then random placement: every
    // evidence is relevant with probability `relevance`, and the per-record
    // count never strays more than one from relevance * E.
    const std::int64_t n_evidence = config.evidences_per_record;
    const double expected = relevance * static_cast<double>(n_evidence);
    std::int64_t n_relevant = static_cast<std::int64_t>(std::floor(expected));
    if (rng.bernoulli(expected - static_cast<double>(n_relevant))) ++n_relevant;
    n_relevant = std::min(n_relevant, n_evidence);
    std::vector<char> relevant_at(static_cast<std::size_t>(n_evidence), 0);
    std::fill_n(relevant_at.begin(), n_relevant, 1);
    rng.shuffle(relevant_at);

    std::vector<Evidence> evidences;
    for (std::int64_t i = 0; i < n_evidence; ++i) {
        Evidence e;
        e.index = static_cast<int>(i + 1);
        const bool relevant = relevant_at[static_cast<std::size_t>(i)] != 0;
        const ProductArchetype* source = &archetype;
        if (!relevant) {
            if (vocab.size() < 2) throw_validation("noisy generation needs at least two product archetypes");
            std::size_t other = static_cast<std::size_t>(rng.below(vocab.size() - 1));
            source = &vocab[other >= product ? other + 1 : other];
        }
        if (shape == BenchmarkShape::Synthetic) {
            e.kind = EvidenceKind::CustomerReview;
        } else {
            std::uint64_t k = rng.below(10);
            e.kind = k < 6 ? EvidenceKind::CustomerReview : (k < 8 ? EvidenceKind::ProductDescription : EvidenceKind::QnA);
        }
        e.text = fmt::format("{} {}.", opener(e.kind), evidence_core(*source, rng, pseudo_base, e.index));
        e.gold_relevant = relevant;
        evidences.push_back(std::move(e));
    }
    q.evidence_set = EvidenceSet(std::move(evidences));
    return record;
}

std::vector<BenchmarkRecord> make_records(const GeneratorConfig& config, BenchmarkShape shape) {
    config.validate();
    std::vector<BenchmarkRecord> records;
    records.reserve(static_cast<std::size_t>(config.n_records));
    for (std::int64_t i = 0; i < config.n_records; ++i) records.push_back(make_record(config, shape, i));
    return records;
}

}  // namespace

std::vector<BenchmarkRecord> gen_synthetic(const GeneratorConfig& config) {
    return make_records(config, BenchmarkShape::Synthetic);
}

std::vector<BenchmarkRecord> gen_noisy(const GeneratorConfig& config) { return make_records(config, BenchmarkShape::Noisy); }

std::vector<BenchmarkRecord> generate_records(const GeneratorConfig& config, BenchmarkShape shape) {
    return make_records(config, shape);
}

MockResponse mock_generate_response(const BenchmarkRecord& record, Variant variant, const MockKnobs& knobs,
                                    std::uint64_t seed) {
    knobs.validate();
    Rng rng = Rng::stream(seed, fnv1a64(record.id()), kMockStream + static_cast<std::uint64_t>(variant));
    const EvidenceSet& evidences = record.query_record.evidence_set;
    const auto E = static_cast<std::int64_t>(evidences.size());

    MockResponse out;
    out.response.variant = variant;
    out.truth.id = record.id();
    out.truth.variant = variant;
    ResponseCounts& c = out.truth.counts;
    c.E = E;

    std::vector<int> relevant;
    for (const Evidence& e : evidences) {
        if (e.gold_relevant.value_or(true)) relevant.push_back(e.index);
    }

    if (relevant.empty() && knobs.refusal_on_empty) {
        out.response.text = fmt::format("The reviews do not provide information about the {}.", refusal_topic(record));
        c.m = 1;
        c.n = 1;
        out.truth.refusal = true;
        return out;
    }

    const auto S = static_cast<std::size_t>(knobs.sentences);
    const std::size_t grounded = relevant.empty() ? 0 : round_share(knobs.grounded_fraction, S);
    std::vector<std::size_t> order(S);
    for (std::size_t i = 0; i < S; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<bool> is_grounded(S, false);
    for (std::size_t i = 0; i < grounded; ++i) is_grounded[order[i]] = true;

    std::vector<int> sources = relevant;
    rng.shuffle(sources);

    struct Plan {
        std::string body;
        int source = 0;  // 0 for fillers
        std::vector<std::int64_t> citations;
        bool all_correct = true;
    };
    std::vector<Plan> plan(S);
    std::size_t next_source = 0;
    std::vector<std::size_t> grounded_slots, ungrounded_slots;
    for (std::size_t i = 0; i < S; ++i) {
        if (is_grounded[i]) {
            plan[i].source = sources[next_source++ % sources.size()];
            plan[i].body = restatement(evidences.at(plan[i].source));
            grounded_slots.push_back(i);
        } else {
            plan[i].body = fmt::format("{} {} {} {}", rng.pick(kFillerSubjects), rng.pick(kFillerVerbs),
                                       rng.pick(kFillerObjects), rng.pick(kFillerTails));
            ungrounded_slots.push_back(i);
        }
    }

    if (variant == Variant::Citation) {
        rng.shuffle(grounded_slots);
        const std::size_t cited = round_share(knobs.cite_fraction, grounded_slots.size());
        std::vector<std::size_t> cited_slots(grounded_slots.begin(), grounded_slots.begin() + static_cast<long>(cited));
        for (std::size_t slot : cited_slots) plan[slot].citations.push_back(plan[slot].source);

        auto other_evidence = [&](int avoid) -> std::int64_t {
            std::uint64_t pick = rng.below(static_cast<std::uint64_t>(E - (avoid > 0 ? 1 : 0)));
            auto idx = static_cast<std::int64_t>(pick) + 1;
            if (avoid > 0 && idx >= avoid) ++idx;
            return idx;
        };

        if (E >= 2) {
            rng.shuffle(cited_slots);
            const std::size_t miscited = round_share(knobs.miscite_fraction, cited_slots.size());
            for (std::size_t i = 0; i < miscited; ++i) {
                Plan& p = plan[cited_slots[i]];
                p.citations.push_back(other_evidence(p.source));
                p.all_correct = false;
            }
        }
        rng.shuffle(cited_slots);
        const std::size_t invalid = round_share(knobs.plant_invalid, cited_slots.size());
        for (std::size_t i = 0; i < invalid; ++i) {
            Plan& p = plan[cited_slots[i]];
            p.citations.push_back(E + 1 + static_cast<std::int64_t>(rng.below(3)));
            p.all_correct = false;
        }
        if (E >= 1) {
            rng.shuffle(ungrounded_slots);
            const std::size_t false_cited = round_share(knobs.false_cite_fraction, ungrounded_slots.size());
            for (std::size_t i = 0; i < false_cited; ++i) {
                Plan& p = plan[ungrounded_slots[i]];
                p.citations.push_back(other_evidence(0));
                p.all_correct = false;
            }
        }
    }

    std::set<std::int64_t> cited_valid;
    std::string text;
    for (std::size_t i = 0; i < S; ++i) {
        const Plan& p = plan[i];
        std::string sentence = p.body;
        if (!p.citations.empty()) {
            // Vary the marker style: before the period or after it, runs or comma lists.
            std::string markers = format_markers(p.citations, rng.bernoulli(0.3));
            sentence = rng.bernoulli(0.2) ? fmt::format("{}. {}", sentence, markers)
                                          : fmt::format("{} {}.", sentence, markers);
        } else {
            sentence += '.';
        }
        if (i) text += ' ';
        text += sentence;

        if (p.source > 0) ++c.m_ground;
        c.r += static_cast<std::int64_t>(p.citations.size());
        if (!p.citations.empty()) {
            ++c.n_cited;
            if (p.all_correct) ++c.n_pcited;
            if (p.source > 0 && p.citations.front() == p.source) ++c.r_entail;
        }
        for (auto idx : p.citations) {
            if (idx >= 1 && idx <= E) cited_valid.insert(idx);
        }
    }
    c.m = static_cast<std::int64_t>(S);
    c.n = static_cast<std::int64_t>(S);
    c.k_ground = static_cast<std::int64_t>(cited_valid.size());
    out.response.text = std::move(text);
    return out;
}

std::vector<TruthEntry> attach_mock_responses(std::vector<BenchmarkRecord>& records, const MockProfile& profile,
                                              const std::vector<Variant>& variants) {
    std::vector<TruthEntry> truth;
    for (BenchmarkRecord& record : records) {
        for (Variant v : variants) {
            MockResponse mock = mock_generate_response(record, v, profile.for_variant(v), profile.seed);
            record.responses[v] = std::move(mock.response);
            truth.push_back(std::move(mock.truth));
        }
    }
    std::stable_sort(truth.begin(), truth.end(), [](const TruthEntry& a, const TruthEntry& b) {
        return a.id != b.id ? a.id < b.id : a.variant < b.variant;
    });
    return truth;
}

GeneratedCorpus generate_corpus(const GeneratorConfig& config, BenchmarkShape shape, const MockProfile& profile,
                                const std::vector<Variant>& variants) {
    GeneratedCorpus corpus;
    corpus.records = generate_records(config, shape);
    corpus.truth = attach_mock_responses(corpus.records, profile, variants);
    return corpus;
}

double realized_relevance(const std::vector<BenchmarkRecord>& records) {
    std::size_t labeled = 0, relevant = 0;
    for (const BenchmarkRecord& r : records) {
        for (const Evidence& e : r.query_record.evidence_set) {
            if (!e.gold_relevant) continue;
            ++labeled;
            relevant += *e.gold_relevant ? 1 : 0;
        }
    }
    return labeled == 0 ? 0.0 : static_cast<double>(relevant) / static_cast<double>(labeled);
}

std::filesystem::path truth_path_for(const std::filesystem::path& benchmark_path) {
    std::filesystem::path p = benchmark_path;
    if (p.extension() == ".jsonl") p.replace_extension();
    p += ".truth.jsonl";
    return p;
}

void save_truth(const std::vector<TruthEntry>& truth, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io(fmt::format("cannot write truth sidecar '{}'", path.string()));
    for (const TruthEntry& t : truth) {
        const ResponseCounts& c = t.counts;
        json j = {{"id", t.id},
                  {"variant", std::string(to_string(t.variant))},
                  {"refusal", t.refusal},
                  {"counts",
                   {{"m", c.m}, {"m_ground", c.m_ground}, {"r", c.r}, {"r_entail", c.r_entail}, {"n", c.n},
                    {"n_cited", c.n_cited}, {"n_pcited", c.n_pcited}, {"k_ground", c.k_ground}, {"E", c.E}}}};
        out << j.dump() << '\n';
    }
    if (!out) throw_io(fmt::format("write failed for '{}'", path.string()));
}

std::vector<TruthEntry> load_truth(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io(fmt::format("cannot read truth sidecar '{}'", path.string()));
    std::vector<TruthEntry> truth;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json j = json::parse(line);
            TruthEntry t;
            t.id = j.at("id").get<std::string>();
            t.variant = parse_variant(j.at("variant").get<std::string>());
            t.refusal = j.at("refusal").get<bool>();
            const json& c = j.at("counts");
            t.counts.m = c.at("m").get<std::int64_t>();
            t.counts.m_ground = c.at("m_ground").get<std::int64_t>();
            t.counts.r = c.at("r").get<std::int64_t>();
            t.counts.r_entail = c.at("r_entail").get<std::int64_t>();
            t.counts.n = c.at("n").get<std::int64_t>();
            t.counts.n_cited = c.at("n_cited").get<std::int64_t>();
            t.counts.n_pcited = c.at("n_pcited").get<std::int64_t>();
            t.counts.k_ground = c.at("k_ground").get<std::int64_t>();
            t.counts.E = c.at("E").get<std::int64_t>();
            truth.push_back(std::move(t));
        } catch (const json::exception& e) {
            throw_validation(fmt::format("{}:{}: malformed truth line ({})", path.string(), line_number, e.what()));
        }
    }
    return truth;
}

void load_generator_config(const std::filesystem::path& path, GeneratorConfig& config, MockProfile& profile) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io(fmt::format("cannot read config '{}'", path.string()));
    try {
        json j = json::parse(in);
        config.seed = j.value("seed", config.seed);
        profile.seed = config.seed;
        config.n_records = j.value("n_records", config.n_records);
        config.evidences_per_record = j.value("evidences_per_record", config.evidences_per_record);
        config.relevance_rate = j.value("relevance_rate", config.relevance_rate);
        if (auto products = j.find("products"); products != j.end()) {
            config.product_vocabulary.clear();
            for (const json& p : *products) {
                ProductArchetype a;
                a.product = p.at("product").get<std::string>();
                for (const auto& [name, values] : p.at("attributes").items()) {
                    a.attributes.push_back(ProductAttribute{name, values.get<std::vector<std::string>>()});
                }
                a.contexts = p.at("contexts").get<std::vector<std::string>>();
                config.product_vocabulary.push_back(std::move(a));
            }
        }
        if (auto mock = j.find("mock"); mock != j.end()) {
            for (const auto& [name, knobs] : mock->items()) knobs_from_json(knobs, profile.knobs[parse_variant(name)]);
        }
    } catch (const json::exception& e) {
        throw_validation(fmt::format("config '{}' is malformed: {}", path.string(), e.what()));
    }
    config.validate();
    for (const auto& [variant, knobs] : profile.knobs) knobs.validate();
}

}  // namespace groundcheck
