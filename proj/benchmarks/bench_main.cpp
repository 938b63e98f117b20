// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "groundcheck/benchgen.hpp"
#include "groundcheck/citation_parser.hpp"
#include "groundcheck/judge.hpp"
#include "groundcheck/metrics.hpp"
#include "groundcheck/mui_cache.hpp"
#include "groundcheck/refusal.hpp"

namespace {

using namespace groundcheck;

GeneratedCorpus corpus(std::int64_t evidences) {
    GeneratorConfig config;
    config.n_records = 64;
    config.evidences_per_record = evidences;
    return generate_corpus(config, BenchmarkShape::Noisy, MockProfile{}, {Variant::Citation});
}

void BM_ParseResponse(benchmark::State& state) {
    const auto c = corpus(24);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& r = c.records[i++ % c.records.size()];
        benchmark::DoNotOptimize(parse_response(*r.response(Variant::Citation), r.query_record.evidence_set));
    }
}
BENCHMARK(BM_ParseResponse);

void BM_LexicalEntails(benchmark::State& state) {
    const auto c = corpus(24);
    const auto& r = c.records.front();
    const std::string hypothesis = r.response(Variant::Citation)->text;
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& e = r.query_record.evidence_set.evidences()[i++ % r.query_record.evidence_set.size()];
        benchmark::DoNotOptimize(LexicalOracle::entails(e.text, hypothesis));
    }
}
BENCHMARK(BM_LexicalEntails);

// Fresh judge per iteration, so nothing is served from the memo cache.
void BM_EvaluateResponse(benchmark::State& state) {
    const auto c = corpus(state.range(0));
    const RefusalDetector refusal;
    std::size_t i = 0;
    for (auto _ : state) {
        auto judge = make_lexical_judge();
        benchmark::DoNotOptimize(evaluate_response(c.records[i++ % c.records.size()], Variant::Citation, *judge, refusal));
    }
}
BENCHMARK(BM_EvaluateResponse)->Arg(5)->Arg(24);

void BM_RunMultiUx(benchmark::State& state) {
    const auto c = corpus(24);
    const TemplateSet templates = TemplateSet::defaults();
    std::vector<UxVariant> family = {{"answer", true}};
    for (int k = 1; k < state.range(0); ++k) family.push_back({"ux" + std::to_string(k), false});
    MuiConfig config;
    MuiSimulator sim(config);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim.run_multi_ux(c.records[i++ % c.records.size()].query_record, family, templates));
    }
}
BENCHMARK(BM_RunMultiUx)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
