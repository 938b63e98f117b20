// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "groundcheck/benchgen.hpp"
#include "groundcheck/judge.hpp"
#include "groundcheck/metrics.hpp"
#include "groundcheck/model.hpp"
#include "groundcheck/mui_cache.hpp"
#include "groundcheck/prompt.hpp"
#include "groundcheck/refusal.hpp"
#include "groundcheck/report.hpp"

namespace groundcheck::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Backend: return kExitBackend;
        case ErrorKind::TruthMismatch: return kExitTruthMismatch;
        case ErrorKind::Validation:
        case ErrorKind::Io:
        case ErrorKind::Capacity: return kExitValidation;
    }
    return kExitValidation;
}

namespace {

// Resolved settings: defaults, then environment, then --config file, then flags.
struct RunConfig {
    GeneratorConfig generator;
    MockProfile profile;
    BenchmarkShape shape = BenchmarkShape::Synthetic;

    std::string judge_backend = "lexical";
    RemoteEndpoint judge_endpoint = RemoteEndpoint::from_env("GROUNDCHECK_JUDGE_URL", "GROUNDCHECK_JUDGE_TOKEN");
    std::size_t max_in_flight = 8;
    std::optional<fs::path> judge_templates;

    std::string gen_backend = "mock";
    RemoteEndpoint gen_endpoint = RemoteEndpoint::from_env("GROUNDCHECK_GEN_URL", "GROUNDCHECK_GEN_TOKEN");
    int max_tokens = 512;

    std::optional<fs::path> templates;
    std::optional<fs::path> refusal_patterns;
    std::size_t jobs = 1;
    AggregationMode mode = AggregationMode::Micro;
};

// Every flag any subcommand may register. Unset optionals leave the config alone.
struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> n_records;
    std::optional<std::int64_t> evidences;
    std::optional<double> relevance;
    std::optional<std::string> shape;
    std::vector<std::string> mock;
    std::optional<std::string> judge;
    std::optional<std::string> judge_url;
    std::optional<std::size_t> max_in_flight;
    std::optional<std::string> judge_templates;
    std::optional<std::string> gen;
    std::optional<std::string> gen_url;
    std::optional<int> max_tokens;
    std::optional<std::string> templates;
    std::optional<std::string> refusal_patterns;
    std::optional<std::size_t> jobs;
    std::optional<std::string> mode;
};

void read_endpoint(const json& j, RemoteEndpoint& endpoint, std::string& backend) {
    backend = j.value("backend", backend);
    endpoint.base_url = j.value("url", endpoint.base_url);
    endpoint.token = j.value("token", endpoint.token);
    if (j.contains("timeout_ms")) endpoint.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<std::int64_t>());
}

void apply_config_file(const fs::path& path, RunConfig& c) {
    load_generator_config(path, c.generator, c.profile);
    std::ifstream in(path, std::ios::binary);
    try {
        json j = json::parse(in);
        if (j.contains("shape")) c.shape = parse_benchmark_shape(j.at("shape").get<std::string>());
        if (auto it = j.find("judge"); it != j.end()) {
            read_endpoint(*it, c.judge_endpoint, c.judge_backend);
            c.max_in_flight = it->value("max_in_flight", c.max_in_flight);
            if (it->contains("templates")) c.judge_templates = it->at("templates").get<std::string>();
        }
        if (auto it = j.find("gen"); it != j.end()) {
            read_endpoint(*it, c.gen_endpoint, c.gen_backend);
            c.max_tokens = it->value("max_tokens", c.max_tokens);
        }
        if (j.contains("templates")) c.templates = j.at("templates").get<std::string>();
        if (j.contains("refusal_patterns")) c.refusal_patterns = j.at("refusal_patterns").get<std::string>();
        c.jobs = j.value("jobs", c.jobs);
        if (j.contains("mode")) c.mode = parse_aggregation_mode(j.at("mode").get<std::string>());
    } catch (const json::exception& e) {
        throw_validation(fmt::format("config '{}' is malformed: {}", path.string(), e.what()));
    }
}

void apply_mock_override(const std::string& spec, MockProfile& profile) {
    // variant.key=value
    auto dot = spec.find('.');
    auto eq = spec.find('=');
    if (dot == std::string::npos || eq == std::string::npos || eq < dot) {
        throw_validation(fmt::format("bad --mock '{}': expected variant.knob=value", spec));
    }
    Variant variant = parse_variant(spec.substr(0, dot));
    set_mock_knob(profile.knobs[variant], std::string_view(spec).substr(dot + 1, eq - dot - 1),
                  std::string_view(spec).substr(eq + 1));
}

RunConfig resolve(const Flags& f) {
    RunConfig c;
    if (f.config) apply_config_file(*f.config, c);
    if (f.seed) {
        c.generator.seed = *f.seed;
        c.profile.seed = *f.seed;
    }
    if (f.n_records) c.generator.n_records = *f.n_records;
    if (f.evidences) c.generator.evidences_per_record = *f.evidences;
    if (f.relevance) c.generator.relevance_rate = *f.relevance;
    if (f.shape) c.shape = parse_benchmark_shape(*f.shape);
    for (const std::string& spec : f.mock) apply_mock_override(spec, c.profile);
    if (f.judge) c.judge_backend = *f.judge;
    if (f.judge_url) c.judge_endpoint.base_url = *f.judge_url;
    if (f.max_in_flight) c.max_in_flight = *f.max_in_flight;
    if (f.judge_templates) c.judge_templates = *f.judge_templates;
    if (f.gen) c.gen_backend = *f.gen;
    if (f.gen_url) c.gen_endpoint.base_url = *f.gen_url;
    if (f.max_tokens) c.max_tokens = *f.max_tokens;
    if (f.templates) c.templates = *f.templates;
    if (f.refusal_patterns) c.refusal_patterns = *f.refusal_patterns;
    if (f.jobs) c.jobs = *f.jobs;
    if (f.mode) c.mode = parse_aggregation_mode(*f.mode);

    if (c.judge_backend != "lexical" && c.judge_backend != "remote") {
        throw_validation(fmt::format("unknown judge backend '{}': expected lexical or remote", c.judge_backend));
    }
    if (c.gen_backend != "mock" && c.gen_backend != "remote") {
        throw_validation(fmt::format("unknown generator backend '{}': expected mock or remote", c.gen_backend));
    }
    if (c.jobs == 0) throw_validation("--jobs must be >= 1");
    if (c.max_in_flight == 0 || c.max_in_flight > 1024) throw_validation("max in-flight judge calls must be in [1, 1024]");
    if (c.max_tokens <= 0) throw_validation("--max-tokens must be >= 1");
    c.generator.validate();
    for (const auto& [variant, knobs] : c.profile.knobs) knobs.validate();
    return c;
}

void add_config_flag(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "JSON run configuration (flags take precedence)");
}

void add_generator_flags(CLI::App* app, Flags& f) {
    app->add_option("--shape", f.shape, "Benchmark shape: synthetic or noisy");
    app->add_option("--n,--records", f.n_records, "Number of records");
    app->add_option("--seed", f.seed, "Generator seed");
    app->add_option("--evidences", f.evidences, "Evidences per record");
    app->add_option("--relevance", f.relevance, "Target relevance rate (noisy shape)");
    app->add_option("--mock", f.mock, "Mock knob override, e.g. citation.cite_fraction=0.5 (repeatable)");
}

void add_judge_flags(CLI::App* app, Flags& f) {
    app->add_option("--judge", f.judge, "Judge backend: lexical or remote");
    app->add_option("--judge-url", f.judge_url, "Remote judge base URL");
    app->add_option("--max-in-flight", f.max_in_flight, "Concurrent judge calls");
    app->add_option("--judge-templates", f.judge_templates, "Directory with nli.txt and decompose.txt");
    app->add_option("--refusal-patterns", f.refusal_patterns, "Refusal pattern file");
}

void add_gen_flags(CLI::App* app, Flags& f) {
    app->add_option("--gen", f.gen, "Generator backend: mock or remote");
    app->add_option("--gen-url", f.gen_url, "Remote generator base URL");
    app->add_option("--max-tokens", f.max_tokens, "Generation length limit (remote)");
    app->add_option("--templates", f.templates, "Prompt template directory");
}

std::vector<Variant> parse_variants(const std::vector<std::string>& names) {
    std::vector<Variant> out;
    for (const std::string& name : names) {
        Variant v = parse_variant(name);
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::unique_ptr<Judge> make_judge(const RunConfig& c) {
    JudgeOptions options;
    options.max_in_flight = c.max_in_flight;
    if (c.judge_backend == "lexical") return make_lexical_judge(options);
    JudgePromptTemplates templates =
        c.judge_templates ? JudgePromptTemplates::load(*c.judge_templates) : JudgePromptTemplates::defaults();
    return std::make_unique<Judge>(std::make_shared<RemoteLlmJudge>(c.judge_endpoint, std::move(templates)), options);
}

RefusalDetector make_refusal(const RunConfig& c) {
    return c.refusal_patterns ? RefusalDetector::from_file(*c.refusal_patterns) : RefusalDetector();
}

TemplateSet make_templates(const RunConfig& c) {
    return c.templates ? TemplateSet::load(*c.templates) : TemplateSet::defaults();
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions are captured per index.
std::vector<std::exception_ptr> parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(jobs, n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return errors;
}

std::string describe(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown error";
    }
}

struct Task {
    std::size_t record;
    Variant variant;
};

// Fills in responses for every (record, variant). Returns the mock truth when mocking.
std::vector<TruthEntry> generate_responses(std::vector<BenchmarkRecord>& records, const std::vector<Variant>& variants,
                                           const RunConfig& c) {
    const TemplateSet templates = make_templates(c);
    std::unique_ptr<Generator> generator;
    MockGenerator* mock = nullptr;
    if (c.gen_backend == "mock") {
        auto owned = std::make_unique<MockGenerator>(records, c.profile);
        mock = owned.get();
        generator = std::move(owned);
    } else {
        generator = std::make_unique<RemoteGenerator>(c.gen_endpoint, c.max_tokens);
    }

    std::vector<Task> tasks;
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (Variant v : variants) tasks.push_back({i, v});
    }
    std::vector<RawResponse> responses(tasks.size());
    auto errors = parallel_for(tasks.size(), c.jobs, [&](std::size_t i) {
        responses[i] = generator->generate(assemble(tasks[i].variant, records[tasks[i].record].query_record, templates));
    });
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<TruthEntry> truth;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        BenchmarkRecord& record = records[tasks[i].record];
        record.responses[tasks[i].variant] = std::move(responses[i]);
        if (mock != nullptr) truth.push_back(mock->truth(record.id(), tasks[i].variant));
    }
    std::sort(truth.begin(), truth.end(), [](const TruthEntry& a, const TruthEntry& b) {
        return std::tie(a.id, a.variant) < std::tie(b.id, b.variant);
    });
    return truth;
}

struct Evaluation {
    std::vector<MetricsReport> reports;
    std::vector<std::string> skipped;
};

// Evaluates the requested variants, or every variant a record carries when none are requested.
Evaluation evaluate_records(const std::vector<BenchmarkRecord>& records, const std::vector<Variant>& variants,
                            Judge& judge, const RefusalDetector& refusal, std::size_t jobs, bool skip_failed) {
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (variants.empty()) {
            for (const auto& [v, response] : records[i].responses) tasks.push_back({i, v});
            continue;
        }
        for (Variant v : variants) {
            if (records[i].response(v) == nullptr) {
                throw_validation(fmt::format("record '{}' has no {} response (run generate or pass --generate)",
                                             records[i].id(), to_string(v)));
            }
            tasks.push_back({i, v});
        }
    }
    std::vector<std::optional<MetricsReport>> slots(tasks.size());
    auto errors = parallel_for(tasks.size(), jobs, [&](std::size_t i) {
        slots[i] = evaluate_response(records[tasks[i].record], tasks[i].variant, judge, refusal);
    });

    Evaluation out;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (errors[i]) {
            if (!skip_failed) std::rethrow_exception(errors[i]);
            out.skipped.push_back(fmt::format("{} ({}): {}", records[tasks[i].record].id(), to_string(tasks[i].variant),
                                              describe(errors[i])));
            continue;
        }
        out.reports.push_back(std::move(*slots[i]));
    }
    return out;
}

std::string describe_counts(const ResponseCounts& c) {
    return fmt::format("m={} m_ground={} r={} r_entail={} n={} n_cited={} n_pcited={} k_ground={} E={}", c.m, c.m_ground,
                       c.r, c.r_entail, c.n, c.n_cited, c.n_pcited, c.k_ground, c.E);
}

// Returns the number of mismatching responses and logs the first few.
std::size_t verify_truth(const std::vector<MetricsReport>& reports, const std::vector<TruthEntry>& truth,
                         std::ostream& err) {
    std::map<std::pair<std::string, Variant>, const TruthEntry*> planted;
    for (const TruthEntry& t : truth) planted[{t.id, t.variant}] = &t;
    std::size_t mismatches = 0;
    auto log = [&](const std::string& line) {
        if (++mismatches <= 20) err << line << '\n';
    };
    for (const MetricsReport& r : reports) {
        auto it = planted.find({r.id, r.variant});
        if (it == planted.end()) {
            log(fmt::format("mismatch {} ({}): no planted truth", r.id, to_string(r.variant)));
            continue;
        }
        const TruthEntry& t = *it->second;
        if (t.counts != r.counts) {
            log(fmt::format("mismatch {} ({}):\n  planted  {}\n  measured {}", r.id, to_string(r.variant),
                            describe_counts(t.counts), describe_counts(r.counts)));
        } else if (t.refusal != r.refusal) {
            log(fmt::format("mismatch {} ({}): planted refusal={} measured refusal={}", r.id, to_string(r.variant),
                            t.refusal, r.refusal));
        }
    }
    return mismatches;
}

void write_output(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
    if (!path) {
        out << text;
        return;
    }
    std::ofstream file(*path, std::ios::binary | std::ios::trunc);
    if (!file) throw_io(fmt::format("cannot write '{}'", *path));
    file << text;
    if (!file) throw_io(fmt::format("failed writing '{}'", *path));
}

ReportFormat format_for(const std::optional<std::string>& flag, const std::optional<std::string>& path) {
    if (flag) return parse_report_format(*flag);
    if (path && fs::path(*path).extension() == ".md") return ReportFormat::Markdown;
    return ReportFormat::Json;
}

std::string rate_text(const std::optional<Rational>& rate) { return rate ? format_fixed(*rate) : "n/a"; }

json rate_json(const std::optional<Rational>& rate) {
    // Emitted as a number token with exactly four decimals.
    return rate ? json::parse(format_fixed(*rate)) : json(nullptr);
}

// ---------------------------------------------------------------------------
// Subcommands

struct GenBenchArgs {
    std::string out;
    std::vector<std::string> variants{"vanilla", "guided", "citation"};
};

int cmd_gen_bench(const Flags& flags, const GenBenchArgs& args, std::ostream& err) {
    RunConfig c = resolve(flags);
    GeneratedCorpus corpus = generate_corpus(c.generator, c.shape, c.profile, parse_variants(args.variants));
    save_benchmark(corpus.records, args.out);
    const fs::path truth = truth_path_for(args.out);
    save_truth(corpus.truth, truth);
    err << fmt::format("wrote {} {} records to {} (relevance {:.4f}); planted truth in {}\n", corpus.records.size(),
                       to_string(c.shape), args.out, realized_relevance(corpus.records), truth.string());
    return kExitOk;
}

struct GenerateArgs {
    std::string bench;
    std::string out;
    std::vector<std::string> variants{"vanilla", "guided", "citation"};
};

int cmd_generate(const Flags& flags, const GenerateArgs& args, std::ostream& err) {
    RunConfig c = resolve(flags);
    std::vector<BenchmarkRecord> records = load_benchmark(args.bench);
    std::vector<TruthEntry> truth = generate_responses(records, parse_variants(args.variants), c);
    save_benchmark(records, args.out);
    if (c.gen_backend == "mock") save_truth(truth, truth_path_for(args.out));
    err << fmt::format("generated {} responses for {} records into {}\n", records.size() * args.variants.size(),
                       records.size(), args.out);
    return kExitOk;
}

struct EvaluateArgs {
    std::string bench;
    std::optional<std::string> truth;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::vector<std::string> variants;
    bool verify_truth = false;
    bool skip_failed = false;
    bool generate = false;
};

int cmd_evaluate(const Flags& flags, const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
    RunConfig c = resolve(flags);
    std::vector<BenchmarkRecord> records = load_benchmark(args.bench);
    std::vector<Variant> variants = parse_variants(args.variants);

    std::vector<TruthEntry> truth;
    bool have_truth = false;
    if (args.generate) {
        std::vector<Variant> to_generate = variants.empty() ? std::vector<Variant>(std::begin(kAllVariants), std::end(kAllVariants)) : variants;
        truth = generate_responses(records, to_generate, c);
        have_truth = c.gen_backend == "mock";
        variants = to_generate;
    }
    if (args.verify_truth && !have_truth) {
        fs::path path = args.truth ? fs::path(*args.truth) : truth_path_for(args.bench);
        if (!fs::exists(path)) {
            throw_validation(fmt::format("--verify-truth needs a planted truth sidecar; '{}' does not exist", path.string()));
        }
        truth = load_truth(path);
        have_truth = true;
    }

    std::unique_ptr<Judge> judge = make_judge(c);
    const RefusalDetector refusal = make_refusal(c);
    Evaluation evaluation = evaluate_records(records, variants, *judge, refusal, c.jobs, args.skip_failed);
    for (const std::string& s : evaluation.skipped) err << "skipped " << s << '\n';

    write_output(args.out, render_report(evaluation.reports, format_for(args.format, args.out), c.mode), out);

    if (args.verify_truth) {
        std::size_t mismatches = verify_truth(evaluation.reports, truth, err);
        if (mismatches != 0) {
            err << fmt::format("truth verification failed: {} of {} responses differ from planted counts\n", mismatches,
                               evaluation.reports.size());
            return kExitTruthMismatch;
        }
        err << fmt::format("verified {} responses against planted truth\n", evaluation.reports.size());
    }
    return kExitOk;
}

struct AblateArgs {
    std::vector<std::int64_t> counts;
    std::string variant = "citation";
    std::optional<std::string> out;
    std::optional<std::string> format;
};

int cmd_ablate(Flags flags, const AblateArgs& args, std::ostream& out, std::ostream& err) {
    if (!flags.shape) flags.shape = "noisy";
    RunConfig c = resolve(flags);
    if (args.counts.empty()) throw_validation("--counts needs at least one evidence count");
    for (std::int64_t k : args.counts) {
        if (k < 1) throw_validation(fmt::format("evidence counts must be >= 1, got {}", k));
    }
    const Variant variant = parse_variant(args.variant);
    std::unique_ptr<Judge> judge = make_judge(c);
    const RefusalDetector refusal = make_refusal(c);

    struct Row {
        std::int64_t evidences;
        AggregateReport aggregate;
    };
    std::vector<Row> rows;
    for (std::int64_t k : args.counts) {
        GeneratorConfig g = c.generator;
        g.evidences_per_record = k;
        GeneratedCorpus corpus = generate_corpus(g, c.shape, c.profile, {variant});
        Evaluation e = evaluate_records(corpus.records, {variant}, *judge, refusal, c.jobs, false);
        rows.push_back({k, aggregate_corpus(e.reports, c.mode)});
        err << fmt::format("evaluated {} responses with {} evidences\n", e.reports.size(), k);
    }

    const Metric columns[] = {Metric::Ccr, Metric::Scr, Metric::Eur};
    std::string text;
    if (format_for(args.format, args.out) == ReportFormat::Json) {
        json j;
        j["mode"] = to_string(c.mode);
        j["variant"] = to_string(variant);
        j["rows"] = json::array();
        for (const Row& row : rows) {
            json r;
            r["evidences"] = row.evidences;
            r["records"] = row.aggregate.records;
            for (Metric m : columns) r[std::string(to_string(m))] = rate_json(row.aggregate.metrics.at(m).value);
            j["rows"].push_back(std::move(r));
        }
        text = j.dump(2) + "\n";
    } else {
        text = fmt::format("# Ablation on the number of evidences ({}, {})\n\n", to_string(variant), to_string(c.mode));
        text += "| # of evidences | CCR | SCR | EUR |\n|---:|---:|---:|---:|\n";
        for (const Row& row : rows) {
            text += fmt::format("| {} | {} | {} | {} |\n", row.evidences,
                                rate_text(row.aggregate.metrics.at(Metric::Ccr).value),
                                rate_text(row.aggregate.metrics.at(Metric::Scr).value),
                                rate_text(row.aggregate.metrics.at(Metric::Eur).value));
        }
    }
    write_output(args.out, text, out);
    return kExitOk;
}

struct MuiArgs {
    std::size_t page_size = 16;
    std::vector<std::string> ux{"answer:cite", "recommend"};
    std::size_t budget_pages = 0;
    std::size_t max_streams = 4;
    std::size_t max_decode_steps = 16;
    std::optional<std::string> bench;
    std::optional<std::string> out;
    bool keep_going = false;
    bool verify = false;
};

std::string percent(std::uint64_t part, std::uint64_t whole) {
    if (whole == 0) return "n/a";
    return fmt::format("{:.2f}%", 100.0 * static_cast<double>(part) / static_cast<double>(whole));
}

int cmd_mui_sim(const Flags& flags, const MuiArgs& args, std::ostream& out, std::ostream& err) {
    RunConfig c = resolve(flags);
    std::vector<UxVariant> family;
    for (const std::string& spec : args.ux) family.push_back(UxVariant::parse(spec));
    validate_ux_family(family);

    std::vector<BenchmarkRecord> records =
        args.bench ? load_benchmark(*args.bench) : generate_records(c.generator, c.shape);
    const TemplateSet templates = make_templates(c);

    MuiConfig config;
    config.page_size = args.page_size;
    config.budget_pages = args.budget_pages;
    config.max_concurrent_streams = args.max_streams;
    config.max_decode_steps = args.max_decode_steps;
    config.model.seed = c.generator.seed;
    MuiSimulator sim(config);

    CacheStats total;
    std::size_t mismatches = 0;
    for (const BenchmarkRecord& record : records) {
        try {
            MultiUxResult result = sim.run_multi_ux(record.query_record, family, templates);
            total += result.stats;
            if (args.verify) {
                const std::vector<std::uint32_t> standalone =
                    decode_standalone(assemble(Variant::Guided, record.query_record, templates), config);
                for (const UxVariant& ux : family) {
                    if (!ux.needs_citation && result.outputs.at(ux.name) != standalone) {
                        ++mismatches;
                        err << fmt::format("output mismatch for {} ({})\n", record.id(), ux.name);
                    }
                }
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Capacity || !args.keep_going) throw;
            ++total.requests;
            ++total.failed_requests;
            err << fmt::format("request {} failed: {}\n", record.id(), e.what());
        }
    }

    json j;
    j["page_size"] = args.page_size;
    j["budget_pages"] = args.budget_pages;
    j["ux"] = args.ux;
    j["requests"] = total.requests;
    j["failed_requests"] = total.failed_requests;
    j["prefill_tokens_shared"] = total.prefill_tokens_shared;
    j["prefill_tokens_naive"] = total.prefill_tokens_naive;
    j["prefill_savings"] = total.prefill_savings();
    j["pages_allocated"] = total.pages_allocated;
    j["pages_naive"] = total.pages_naive;
    j["peak_refcount"] = total.peak_refcount;
    j["kv_entries_created"] = total.kv_entries_created;
    j["decode_tokens"] = total.decode_tokens;
    j["live_pages"] = sim.allocator().live_pages();
    std::string stats = j.dump(2) + "\n";

    std::string table = fmt::format("{} requests, {} UX variants, page size {}\n", total.requests, family.size(),
                                    args.page_size);
    table += fmt::format("{:<16}{:>12}{:>12}{:>12}{:>10}\n", "", "naive", "shared", "saved", "saved %");
    table += fmt::format("{:<16}{:>12}{:>12}{:>12}{:>10}\n", "prefill tokens", total.prefill_tokens_naive,
                         total.prefill_tokens_shared, total.prefill_savings(),
                         percent(total.prefill_savings(), total.prefill_tokens_naive));
    const std::uint64_t page_savings =
        total.pages_naive >= total.pages_allocated ? total.pages_naive - total.pages_allocated : 0;
    table += fmt::format("{:<16}{:>12}{:>12}{:>12}{:>10}\n", "pages", total.pages_naive, total.pages_allocated,
                         page_savings, percent(page_savings, total.pages_naive));

    if (args.out) {
        write_output(args.out, stats, out);
        out << table;
    } else {
        out << stats << '\n' << table;
    }
    if (sim.allocator().live_pages() != 0) {
        throw Error(ErrorKind::Validation, fmt::format("{} pages leaked", sim.allocator().live_pages()));
    }
    if (mismatches != 0) {
        err << fmt::format("{} non-citation outputs differ from standalone decoding\n", mismatches);
        return kExitTruthMismatch;
    }
    return kExitOk;
}

struct ReportArgs {
    std::string in;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

int cmd_report(const Flags& flags, const ReportArgs& args, std::ostream& out) {
    RunConfig c = resolve(flags);
    std::vector<MetricsReport> reports = load_report(args.in);
    write_output(args.out, render_report(reports, format_for(args.format, args.out), c.mode), out);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"groundcheck: citation grounding evaluation and multi-UX KV-cache simulation", "groundcheck"};
    app.set_version_flag("--version", "groundcheck 0.1.0");
    app.require_subcommand(1);

    Flags flags;
    std::function<int()> action;

    GenBenchArgs gen_bench;
    CLI::App* gb = app.add_subcommand("gen-bench", "Generate a seeded benchmark with mock responses and planted truth");
    gb->add_option("--out,-o", gen_bench.out, "Benchmark JSONL path; truth goes to *.truth.jsonl")->required();
    gb->add_option("--variants", gen_bench.variants, "Variants to attach mock responses for")->delimiter(',');
    add_config_flag(gb, flags);
    add_generator_flags(gb, flags);
    gb->callback([&] { action = [&] { return cmd_gen_bench(flags, gen_bench, err); }; });

    GenerateArgs generate;
    CLI::App* gn = app.add_subcommand("generate", "Assemble prompts and generate responses for a benchmark");
    gn->add_option("--bench,-b", generate.bench, "Input benchmark JSONL")->required();
    gn->add_option("--out,-o", generate.out, "Output benchmark JSONL")->required();
    gn->add_option("--variants", generate.variants, "Prompt variants")->delimiter(',');
    gn->add_option("--jobs,-j", flags.jobs, "Parallel requests");
    gn->add_option("--mock", flags.mock, "Mock knob override, e.g. citation.cite_fraction=0.5 (repeatable)");
    add_config_flag(gn, flags);
    add_gen_flags(gn, flags);
    gn->callback([&] { action = [&] { return cmd_generate(flags, generate, err); }; });

    EvaluateArgs evaluate;
    CLI::App* ev = app.add_subcommand("evaluate", "Score responses and write a metrics report");
    ev->add_option("--bench,-b", evaluate.bench, "Benchmark JSONL")->required();
    ev->add_option("--truth", evaluate.truth, "Planted truth sidecar (default: next to the benchmark)");
    ev->add_option("--out,-o", evaluate.out, "Report path (default: stdout)");
    ev->add_option("--format", evaluate.format, "json or markdown (default from --out extension)");
    ev->add_option("--mode", flags.mode, "Aggregation: micro or macro");
    ev->add_option("--variants", evaluate.variants, "Variants to score (default: all present)")->delimiter(',');
    ev->add_option("--jobs,-j", flags.jobs, "Records evaluated in parallel");
    ev->add_flag("--verify-truth", evaluate.verify_truth, "Compare counts with planted truth; exit 3 on mismatch");
    ev->add_flag("--skip-failed", evaluate.skip_failed, "Skip responses whose judge calls fail");
    ev->add_flag("--generate", evaluate.generate, "Generate responses before scoring");
    ev->add_option("--mock", flags.mock, "Mock knob override for --generate (repeatable)");
    add_config_flag(ev, flags);
    add_judge_flags(ev, flags);
    add_gen_flags(ev, flags);
    ev->callback([&] { action = [&] { return cmd_evaluate(flags, evaluate, out, err); }; });

    AblateArgs ablate;
    CLI::App* ab = app.add_subcommand("ablate", "CCR/SCR/EUR as a function of the number of evidences");
    ab->add_option("--counts", ablate.counts, "Evidence counts, e.g. 24,5")->delimiter(',')->required();
    ab->add_option("--variant", ablate.variant, "Prompt variant to score");
    ab->add_option("--out,-o", ablate.out, "Table path (default: stdout)");
    ab->add_option("--format", ablate.format, "markdown or json (default from --out extension)");
    ab->add_option("--mode", flags.mode, "Aggregation: micro or macro");
    ab->add_option("--jobs,-j", flags.jobs, "Records evaluated in parallel");
    add_config_flag(ab, flags);
    add_generator_flags(ab, flags);
    add_judge_flags(ab, flags);
    ab->callback([&] {
        if (!ablate.format && !ablate.out) ablate.format = "markdown";
        action = [&] { return cmd_ablate(flags, ablate, out, err); };
    });

    MuiArgs mui;
    CLI::App* mu = app.add_subcommand("mui-sim", "Simulate shared-prefix paged KV caching across UX variants");
    mu->add_option("--page-size", mui.page_size, "Tokens per page");
    mu->add_option("--ux", mui.ux, "UX variant name or name:cite (repeatable)");
    mu->add_option("--budget-pages", mui.budget_pages, "Live page limit (0 = unlimited)");
    mu->add_option("--max-streams", mui.max_streams, "Concurrent decode streams");
    mu->add_option("--max-decode-steps", mui.max_decode_steps, "Tokens decoded per UX");
    mu->add_option("--bench,-b", mui.bench, "Benchmark JSONL (default: generate records)");
    mu->add_option("--out,-o", mui.out, "Stats JSON path (default: stdout)");
    mu->add_flag("--keep-going", mui.keep_going, "Count requests that exhaust the budget instead of aborting");
    mu->add_flag("--verify", mui.verify, "Check non-citation outputs against standalone decoding");
    mu->add_option("--templates", flags.templates, "Prompt template directory");
    add_config_flag(mu, flags);
    add_generator_flags(mu, flags);
    mu->callback([&] { action = [&] { return cmd_mui_sim(flags, mui, out, err); }; });

    ReportArgs report;
    CLI::App* rp = app.add_subcommand("report", "Re-render a JSON metrics report");
    rp->add_option("--in,-i", report.in, "JSON report")->required();
    rp->add_option("--out,-o", report.out, "Output path (default: stdout)");
    rp->add_option("--format", report.format, "json or markdown");
    rp->add_option("--mode", flags.mode, "Aggregation: micro or macro");
    rp->callback([&] { action = [&] { return cmd_report(flags, report, out); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        return action();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

}  // namespace groundcheck::cli
