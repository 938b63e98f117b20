// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "brute_force.hpp"
#include "groundcheck/benchgen.hpp"
#include "groundcheck/error.hpp"
#include "groundcheck/metrics.hpp"
#include "groundcheck/rng.hpp"

using namespace groundcheck;

namespace {

EvidenceSet evidences(const std::vector<std::string>& texts) {
    std::vector<Evidence> v;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        v.push_back({static_cast<int>(i + 1), EvidenceKind::CustomerReview, texts[i], true});
    }
    return EvidenceSet(std::move(v));
}

ParsedResponse parse(const std::string& text, const EvidenceSet& es) {
    return parse_response(RawResponse{text, Variant::Citation}, es);
}

std::vector<Claim> claims(const std::vector<std::string>& texts) {
    std::vector<Claim> out;
    for (const auto& t : texts) out.push_back(Claim{t, std::nullopt});
    return out;
}

class CountingOracle final : public JudgeBackend {
public:
    BackendKind kind() const override { return BackendKind::LexicalOracle; }
    bool nli(std::string_view p, std::string_view h) override {
        ++calls;
        return LexicalOracle::entails(p, h);
    }
    std::vector<Claim> decompose(std::string_view text) override { return LexicalOracle().decompose(text); }
    int calls = 0;
};

BenchmarkRecord record(const std::vector<std::string>& ev, const std::string& response) {
    BenchmarkRecord r;
    r.query_record = QueryRecord{"r", "q", evidences(ev)};
    r.responses[Variant::Citation] = RawResponse{response, Variant::Citation};
    return r;
}

Rational q(std::int64_t a, std::int64_t b) { return Rational(a, b); }

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("claim grounding rate") {
    Judge judge(std::make_shared<LexicalOracle>());
    auto es = evidences({"The grip felt tenacious.", "The crema tasted velvety."});

    auto all = claim_grounding_rate(claims({"The crema tasted velvety.", "The grip felt tenacious."}), es, judge);
    CHECK(all.rate == std::optional<Rational>(1));

    auto none = claim_grounding_rate({}, es, judge);
    CHECK_FALSE(none.rate.has_value());
    CHECK(none.denominator == 0);

    // 20 claims, 3 of them unsupported.
    std::vector<std::string> ev_texts, claim_texts;
    for (int i = 0; i < 20; ++i) ev_texts.push_back("token" + std::to_string(i) + " feature" + std::to_string(i) + " held");
    for (int i = 0; i < 20; ++i) claim_texts.push_back(i < 17 ? ev_texts[i] : "unrelated words here " + std::to_string(i));
    auto big = claim_grounding_rate(claims(claim_texts), evidences(ev_texts), judge);
    CHECK(big.numerator == 17);
    CHECK(big.denominator == 20);
    CHECK(*big.rate == q(17, 20));
}

TEST_CASE("claim grounding stops at the first entailing evidence") {
    auto backend = std::make_shared<CountingOracle>();
    Judge judge(backend, JudgeOptions{false, 8});
    auto es = evidences({"grip felt tenacious", "x y z", "a b c"});
    claim_grounding_rate(claims({"grip felt tenacious"}), es, judge);
    CHECK(backend->calls == 1);
    claim_grounding_rate(claims({"nothing matches"}), es, judge);
    CHECK(backend->calls == 4);
}

TEST_CASE("correct citation rate") {
    Judge judge(std::make_shared<LexicalOracle>());
    auto es = evidences({"The grip felt tenacious.", "The crema tasted velvety.", "The tent stayed dry."});

    auto one = correct_citation_rate(parse("The grip felt tenacious [1].", es), es, judge);
    CHECK(one.rate == std::optional<Rational>(1));

    auto bad = correct_citation_rate(parse("The grip felt tenacious [9].", es), es, judge);
    CHECK(bad.denominator == 1);
    CHECK(bad.numerator == 0);
    CHECK(*bad.rate == 0);

    auto two_of_three =
        correct_citation_rate(parse("The grip felt tenacious [1][2]. The tent stayed dry [3].", es), es, judge);
    CHECK(two_of_three.numerator == 2);
    CHECK(two_of_three.denominator == 3);

    CHECK_FALSE(correct_citation_rate(parse("No cites.", es), es, judge).rate.has_value());
}

TEST_CASE("perfect sentence rate") {
    Judge judge(std::make_shared<LexicalOracle>());
    auto es = evidences({"The grip felt tenacious.", "The crema tasted velvety."});
    CHECK(perfect_sentence_rate(parse("The grip felt tenacious [1]. The crema tasted velvety [2].", es), es, judge).rate ==
          std::optional<Rational>(1));
    auto mixed = perfect_sentence_rate(parse("The grip felt tenacious [1][2].", es), es, judge);
    CHECK(mixed.denominator == 1);
    CHECK(mixed.numerator == 0);
    CHECK_FALSE(perfect_sentence_rate(parse("No cites. None here.", es), es, judge).rate.has_value());
}

TEST_CASE("sentence citation rate") {
    auto es = evidences({"a", "b"});
    auto half = sentence_citation_rate(parse("A [1]. B.", es));
    CHECK(*half.rate == q(1, 2));
    CHECK(*sentence_citation_rate(parse("A [1]. B [2].", es)).rate == 1);
    CHECK_FALSE(sentence_citation_rate(parse("", es)).rate.has_value());
    // Invalid-only citations still count as having citations.
    CHECK(*sentence_citation_rate(parse("A [7].", es)).rate == 1);
}

TEST_CASE("evidence utilization values") {
    CHECK(evidence_utilization(5, 10) == q(475, 1000));
    CHECK(evidence_utilization(1, 2) == q(3, 8));
    CHECK(evidence_utilization(5, 10) > evidence_utilization(1, 2));
    CHECK(format_fixed(evidence_utilization(5, 10)) == "0.4750");
    CHECK(format_fixed(evidence_utilization(1, 2)) == "0.3750");
    for (std::int64_t e = 1; e <= 40; ++e) {
        CHECK(evidence_utilization(e, e) == 1);
        CHECK(evidence_utilization(0, e) == 0);
        for (std::int64_t k = 1; k <= e; ++k) CHECK(evidence_utilization(k, e) > evidence_utilization(k - 1, e));
    }
    CHECK_THROWS_AS(evidence_utilization(3, 2), Error);
    CHECK_THROWS_AS(evidence_utilization(0, 0), Error);
}

TEST_CASE("evidence utilization of a response") {
    auto es = evidences({"a", "b", "c", "d"});
    auto u = evidence_utilization_rate(parse("A [1][1]. B [1,4]. C [9].", es), es);
    CHECK(u.k_ground == 2);
    CHECK(u.evidence_count == 4);
    CHECK(*u.rate == evidence_utilization(2, 4));
    CHECK_FALSE(evidence_utilization_rate(parse("A [1].", EvidenceSet{}), EvidenceSet{}).rate.has_value());
}

TEST_CASE("evaluate_response") {
    auto judge = make_lexical_judge();
    RefusalDetector refusal;

    auto verbatim = evaluate_response(
        record({"The grip felt tenacious.", "The crema tasted velvety."}, "The grip felt tenacious [1]. The crema tasted velvety [2]."),
        Variant::Citation, *judge, refusal);
    CHECK(*verbatim.cgr == 1);
    CHECK(*verbatim.ccr == 1);
    CHECK(*verbatim.psr == 1);
    CHECK(*verbatim.scr == 1);
    CHECK(*verbatim.eur == 1);
    CHECK_FALSE(verbatim.refusal);

    auto uncited = evaluate_response(record({"The grip felt tenacious."}, "The grip felt tenacious. It rained."),
                                     Variant::Citation, *judge, refusal);
    CHECK(*uncited.scr == 0);
    CHECK_FALSE(uncited.ccr.has_value());
    CHECK_FALSE(uncited.psr.has_value());
    CHECK(*uncited.cgr == q(1, 2));

    auto refused = evaluate_response(record({"x"}, "The reviews do not provide information about the sole."),
                                     Variant::Citation, *judge, refusal);
    CHECK(refused.refusal);

    CHECK_THROWS_AS(evaluate_response(record({"x"}, "y"), Variant::Guided, *judge, refusal), Error);
}

TEST_CASE("judge calls are shared across metrics") {
    auto backend = std::make_shared<CountingOracle>();
    Judge judge(backend);
    auto r = record({"The grip felt tenacious.", "The crema tasted velvety."}, "The grip felt tenacious [1][2].");
    evaluate_response(r, Variant::Citation, judge, RefusalDetector());
    // Claim vs both evidences covers every pair CCR and PSR need.
    CHECK(backend->calls == 2);
}

TEST_CASE("aggregation") {
    ResponseCounts a;
    a.m = 2;
    a.m_ground = 1;
    a.n = 1;
    a.E = 2;
    a.k_ground = 1;
    ResponseCounts b;
    b.m = 4;
    b.m_ground = 3;
    b.n = 2;
    b.E = 10;
    b.k_ground = 5;
    std::vector<MetricsReport> reports = {MetricsReport::from_counts("a", Variant::Citation, a, false),
                                          MetricsReport::from_counts("b", Variant::Citation, b, false)};

    auto micro = aggregate_corpus(reports, AggregationMode::Micro);
    auto macro = aggregate_corpus(reports, AggregationMode::Macro);
    CHECK(*micro.metrics.at(Metric::Cgr).value == q(4, 6));
    CHECK(*macro.metrics.at(Metric::Cgr).value == q(5, 8));
    CHECK_FALSE(micro.metrics.at(Metric::Ccr).value.has_value());
    CHECK(micro.metrics.at(Metric::Ccr).undefined_records == 2);
    CHECK(macro.metrics.at(Metric::Psr).undefined_records == 2);
    // EUR pools EUR * E over E.
    CHECK(*micro.metrics.at(Metric::Eur).value == (q(3, 8) * 2 + q(475, 1000) * 10) / 12);
    CHECK(*macro.metrics.at(Metric::Eur).value == (q(3, 8) + q(475, 1000)) / 2);
    CHECK(micro.records == 2);

    for (auto mode : {AggregationMode::Micro, AggregationMode::Macro}) {
        auto single = aggregate_corpus({reports[1]}, mode);
        for (Metric m : kAllMetrics) CHECK(single.metrics.at(m).value == reports[1].get(m));
    }
    auto empty = aggregate_corpus({}, AggregationMode::Micro);
    CHECK(empty.records == 0);
    CHECK_FALSE(empty.metrics.at(Metric::Cgr).value.has_value());
    CHECK(parse_aggregation_mode("macro") == AggregationMode::Macro);
    CHECK_THROWS_AS(parse_aggregation_mode("median"), Error);
}

TEST_CASE("counts are validated") {
    ResponseCounts c;
    c.m = 1;
    c.m_ground = 2;
    CHECK_THROWS_AS(MetricsReport::from_counts("x", Variant::Citation, c, false), Error);
    ResponseCounts d;
    d.n = 1;
    d.n_cited = 1;
    d.n_pcited = 2;
    CHECK_THROWS_AS(d.validate(), Error);
}

TEST_CASE("property: pipeline equals brute force on generated fixtures") {
    GeneratorConfig config;
    config.n_records = 30;
    config.evidences_per_record = 7;
    config.relevance_rate = 0.5;
    MockProfile profile;
    profile.knobs[Variant::Citation].plant_invalid = 0.2;
    auto corpus = generate_corpus(config, BenchmarkShape::Noisy, profile, {kAllVariants[0], kAllVariants[1], kAllVariants[2]});
    auto judge = make_lexical_judge();
    for (const auto& r : corpus.records) {
        for (const auto& [variant, response] : r.responses) {
            auto report = evaluate_response(r, variant, *judge, RefusalDetector());
            CHECK(report.counts == groundcheck::testing::brute_force_counts(r, variant));
        }
    }
}

TEST_CASE("property: CGR ignores evidence order, extra unsupported claims never raise it") {
    Rng rng(5);
    auto judge = make_lexical_judge();
    GeneratorConfig config;
    config.n_records = 20;
    config.evidences_per_record = 6;
    auto corpus = generate_corpus(config, BenchmarkShape::Noisy, MockProfile{}, {Variant::Guided});
    for (const auto& r : corpus.records) {
        auto cl = judge->decompose_claims(r.response(Variant::Guided)->text);
        auto base = claim_grounding_rate(cl, r.query_record.evidence_set, *judge);

        std::vector<Evidence> shuffled = r.query_record.evidence_set.evidences();
        rng.shuffle(shuffled);
        for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].index = static_cast<int>(i + 1);
        CHECK(claim_grounding_rate(cl, EvidenceSet(shuffled), *judge).numerator == base.numerator);

        cl.push_back(Claim{"Zzyzx qwop blorf.", std::nullopt});
        auto more = claim_grounding_rate(cl, r.query_record.evidence_set, *judge);
        if (base.rate) CHECK(*more.rate <= *base.rate);
    }
}

}
