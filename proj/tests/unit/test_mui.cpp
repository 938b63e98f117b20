// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "groundcheck/benchgen.hpp"
#include "groundcheck/error.hpp"
#include "groundcheck/mui_cache.hpp"
#include "mui_fixtures.hpp"

using namespace groundcheck;
using groundcheck::testing::sized_request;
using groundcheck::testing::sized_templates;

namespace {

std::vector<std::size_t> fill_levels(const PageAllocator& a, const std::vector<PageId>& pages) {
    std::vector<std::size_t> out;
    for (PageId id : pages) out.push_back(a.page(id).entries.size());
    return out;
}

std::vector<std::uint32_t> tokens_of(const std::vector<KvEntry>& view) {
    std::vector<std::uint32_t> out;
    for (const auto& e : view) out.push_back(e.token_id);
    return out;
}

void release_all(PageAllocator& a, const PrefillResult& p) {
    for (PageId id : p.base_pages) a.release(id);
    for (PageId id : p.citation_pages) a.release(id);
}

std::vector<BenchmarkRecord> corpus(std::int64_t n, std::int64_t e) {
    GeneratorConfig c;
    c.n_records = n;
    c.evidences_per_record = e;
    return gen_noisy(c);
}

const std::vector<UxVariant> kFamily = {{"answer", true}, {"recommend", false}, {"compare", false}};

}  // namespace

TEST_SUITE("mui") {

TEST_CASE("allocator bookkeeping") {
    PageAllocator a(4, 2);
    PageId p = a.allocate(PageTag::BasePrompt);
    CHECK(a.page(p).refcount == 1);
    a.retain(p);
    CHECK(a.peak_refcount() == 2);
    a.append(p, KvEntry{1, 0, 0});
    a.seal(p);
    CHECK_THROWS_AS(a.append(p, KvEntry{2, 1, 0}), Error);
    PageId q = a.allocate(PageTag::Decode);
    try {
        a.allocate(PageTag::Decode);
        FAIL("expected capacity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Capacity);
    }
    for (std::uint32_t i = 0; i < 4; ++i) a.append(q, KvEntry{i, i, 0});
    CHECK_THROWS_AS(a.append(q, KvEntry{9, 9, 0}), Error);
    a.release(p);
    CHECK(a.live_pages() == 2);
    a.release(p);
    a.release(q);
    CHECK(a.live_pages() == 0);
    CHECK(a.leaked_pages() == 0);
    CHECK_THROWS_AS(a.release(q), Error);
    CHECK(a.total_allocations() == 2);
    CHECK(a.entries_created() == 5);
}

TEST_CASE("page lease releases on scope exit") {
    PageAllocator a(4, 0);
    {
        PageLease lease(a);
        lease.adopt(a.allocate(PageTag::Decode));
        lease.adopt(a.allocate(PageTag::Decode));
        CHECK(a.live_pages() == 2);
    }
    CHECK(a.live_pages() == 0);
}

TEST_CASE("prefill pages base and citation tokens separately") {
    MuiSimulator sim(MuiConfig{});
    auto prompt = assemble(Variant::Citation, sized_request(), sized_templates(40, 20));
    REQUIRE(prompt.base_token_count() == 40);
    REQUIRE(prompt.citation_token_count() == 20);
    auto p = sim.prefill(prompt);
    CHECK(fill_levels(sim.allocator(), p.base_pages) == std::vector<std::size_t>{16, 16, 8});
    CHECK(fill_levels(sim.allocator(), p.citation_pages) == std::vector<std::size_t>{16, 4});
    CHECK(sim.allocator().page(p.citation_pages[0]).entries[0].position == 40);
    CHECK(sim.allocator().page(p.citation_pages[0]).tag == PageTag::CitationInstr);
    CHECK(sim.allocator().page(p.base_pages[2]).sealed);
    release_all(sim.allocator(), p);

    auto guided = sim.prefill(assemble(Variant::Guided, sized_request(), sized_templates(40, 20)));
    CHECK(guided.citation_pages.empty());
    CHECK(guided.base_pages.size() == 3);
    release_all(sim.allocator(), guided);
    CHECK(sim.allocator().live_pages() == 0);
}

TEST_CASE("citation instructions must come last") {
    MuiSimulator sim(MuiConfig{});
    auto prompt = assemble(Variant::Citation, sized_request(), sized_templates(10, 5));
    std::swap(prompt.segments[prompt.segments.size() - 1], prompt.segments[prompt.segments.size() - 2]);
    CHECK_THROWS_AS(sim.prefill(prompt), Error);
    CHECK(sim.allocator().live_pages() == 0);
}

TEST_CASE("decode views") {
    MuiSimulator sim(MuiConfig{});
    const auto records = corpus(5, 4);
    const auto t = TemplateSet::defaults();
    for (const auto& r : records) {
        auto full = assemble(Variant::Citation, r.query_record, t);
        auto p = sim.prefill(full);
        auto plain = sim.decode_view(p.table(), UxVariant{"plain", false});
        auto cited = sim.decode_view(p.table(), UxVariant{"cited", true});
        CHECK(tokens_of(plain) == assemble(Variant::Guided, r.query_record, t).token_ids());
        CHECK(tokens_of(cited) == full.token_ids());
        release_all(sim.allocator(), p);

        auto g = sim.prefill(assemble(Variant::Guided, r.query_record, t));
        CHECK(sim.decode_view(g.table(), UxVariant{"plain", false}) == sim.decode_view(g.table(), UxVariant{"cited", true}));
        release_all(sim.allocator(), g);
    }
}

TEST_CASE("broken contiguity is detected") {
    MuiSimulator sim(MuiConfig{});
    auto p = sim.prefill(assemble(Variant::Citation, sized_request(), sized_templates(40, 20)));
    PageTable swapped;
    swapped.pages = p.citation_pages;
    swapped.pages.insert(swapped.pages.end(), p.base_pages.begin(), p.base_pages.end());
    CHECK_THROWS_AS(sim.decode_view(swapped, UxVariant{"x", true}), Error);
    PageTable gap;
    gap.pages = {p.base_pages[0], p.base_pages[2]};
    CHECK_THROWS_AS(sim.decode_view(gap, UxVariant{"x", false}), Error);
    release_all(sim.allocator(), p);
}

TEST_CASE("decode is pure, private and leaves the prompt alone") {
    MuiSimulator sim(MuiConfig{});
    auto p = sim.prefill(assemble(Variant::Citation, sized_request(), sized_templates(30, 10)));
    auto view = sim.decode_view(p.table(), UxVariant{"a", false});
    std::vector<std::vector<KvEntry>> before;
    for (PageId id : p.table().pages) before.push_back(sim.allocator().page(id).entries);

    auto s1 = sim.decode(view, 40);
    auto s2 = sim.decode(view, 40);
    CHECK(s1.tokens.size() == 40);
    CHECK(s1.tokens == s2.tokens);
    CHECK(s1.pages.size() == 3);
    for (PageId id : s1.pages) {
        CHECK(std::find(s2.pages.begin(), s2.pages.end(), id) == s2.pages.end());
        CHECK(sim.allocator().page(id).tag == PageTag::Decode);
    }
    CHECK(sim.allocator().page(s1.pages[0]).entries[0].position == 30);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(sim.allocator().page(p.table().pages[i]).entries == before[i]);

    for (PageId id : s1.pages) sim.allocator().release(id);
    for (PageId id : s2.pages) sim.allocator().release(id);
    release_all(sim.allocator(), p);
    CHECK(sim.allocator().live_pages() == 0);
}

TEST_CASE("corrupting any visible entry changes every later token") {
    MuiSimulator sim(MuiConfig{});
    auto p = sim.prefill(assemble(Variant::Citation, sized_request(), sized_templates(24, 8)));
    auto view = sim.decode_view(p.table(), UxVariant{"a", true});
    auto baseline = sim.decode(view, 12);
    for (PageId id : baseline.pages) sim.allocator().release(id);
    for (std::size_t i = 0; i < view.size(); ++i) {
        for (int field = 0; field < 3; ++field) {
            auto corrupt = view;
            if (field == 0) corrupt[i].token_id ^= 1;
            if (field == 1) corrupt[i].digest ^= 1;
            if (field == 2) corrupt[i].position += 1000;
            auto out = sim.decode(corrupt, 12);
            for (std::size_t k = 0; k < out.tokens.size(); ++k) CHECK(out.tokens[k] != baseline.tokens[k]);
            for (PageId id : out.pages) sim.allocator().release(id);
        }
    }
    release_all(sim.allocator(), p);
}

TEST_CASE("multi-UX outputs match standalone decoding") {
    for (std::size_t streams : {1u, 4u}) {
        MuiConfig config;
        config.max_concurrent_streams = streams;
        MuiSimulator sim(config);
        const auto t = TemplateSet::defaults();
        for (const auto& r : corpus(15, 6)) {
            auto result = sim.run_multi_ux(r.query_record, kFamily, t);
            auto guided = decode_standalone(assemble(Variant::Guided, r.query_record, t), config);
            auto citation = decode_standalone(assemble(Variant::Citation, r.query_record, t), config);
            CHECK(result.outputs.at("recommend") == guided);
            CHECK(result.outputs.at("compare") == guided);
            CHECK(result.outputs.at("answer") == citation);
            auto full = assemble(Variant::Citation, r.query_record, t);
            CHECK(result.stats.kv_entries_created == full.token_ids().size());
            CHECK(result.stats.peak_refcount == kFamily.size() + 1);
        }
        CHECK(sim.allocator().live_pages() == 0);
    }
}

TEST_CASE("savings arithmetic") {
    MuiSimulator sim(MuiConfig{});
    auto t = sized_templates(1000, 100);
    auto two = sim.run_multi_ux(sized_request(), {{"answer", true}, {"plain", false}}, t);
    CHECK(two.stats.prefill_tokens_naive == 2100);
    CHECK(two.stats.prefill_tokens_shared == 1100);
    CHECK(two.stats.prefill_savings() == 1000);
    // ceil(1100/16) + ceil(1000/16) naive prompt pages, plus one decode page per UX.
    CHECK(two.stats.pages_naive == 69 + 63 + 2);
    CHECK(two.stats.pages_allocated == 63 + 7 + 2);

    auto one = sim.run_multi_ux(sized_request(), {{"answer", true}}, t);
    CHECK(one.stats.prefill_tokens_naive == one.stats.prefill_tokens_shared);

    auto plain_only = sim.run_multi_ux(sized_request(), {{"a", false}, {"b", false}}, t);
    CHECK(plain_only.stats.prefill_tokens_shared == 1000);
    CHECK(plain_only.stats.prefill_tokens_naive == 2000);
    CHECK(plain_only.stats.kv_entries_created == 1000);
    CHECK(sim.allocator().live_pages() == 0);
}

TEST_CASE("budget exhaustion fails the request atomically") {
    MuiConfig config;
    config.budget_pages = 5;  // 3 prompt pages fit, decode pages for three UXs do not
    MuiSimulator sim(config);
    auto t = sized_templates(30, 10);
    try {
        sim.run_multi_ux(sized_request(), kFamily, t);
        FAIL("expected a capacity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Capacity);
    }
    CHECK(sim.allocator().live_pages() == 0);
    auto ok = sim.run_multi_ux(sized_request(), {{"a", false}}, t);
    CHECK(ok.outputs.at("a").size() == config.max_decode_steps);
    CHECK(sim.allocator().live_pages() == 0);
}

TEST_CASE("UX families") {
    CHECK(UxVariant::parse("answer:cite") == UxVariant{"answer", true});
    CHECK(UxVariant::parse("recommend") == UxVariant{"recommend", false});
    CHECK_THROWS_AS(UxVariant::parse(":cite"), Error);
    CHECK_THROWS_AS(UxVariant::parse("a:loud"), Error);
    CHECK_THROWS_AS(validate_ux_family({}), Error);
    CHECK_THROWS_AS(validate_ux_family({{"a", false}, {"a", true}}), Error);
    CHECK_THROWS_AS(validate_ux_family({{"a", true}, {"b", true}}), Error);
    CHECK_NOTHROW(validate_ux_family({{"a", true}, {"b", false}}));
    MuiSimulator sim(MuiConfig{});
    CHECK_THROWS_AS(sim.run_multi_ux(sized_request(), {}, TemplateSet::defaults()), Error);
}

TEST_CASE("stats accumulate") {
    CacheStats a;
    a.prefill_tokens_naive = 10;
    a.prefill_tokens_shared = 6;
    a.peak_refcount = 3;
    a.requests = 1;
    CacheStats b = a;
    b.peak_refcount = 5;
    a += b;
    CHECK(a.prefill_savings() == 8);
    CHECK(a.peak_refcount == 5);
    CHECK(a.requests == 2);
}

}
