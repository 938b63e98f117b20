// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace groundcheck {

enum class EvidenceKind { ProductDescription, CustomerReview, QnA };

/// Prompt variant a response was produced under.
enum class Variant { Vanilla, Guided, Citation };

inline constexpr Variant kAllVariants[] = {Variant::Vanilla, Variant::Guided, Variant::Citation};

std::string_view to_string(EvidenceKind kind);
std::string_view to_string(Variant variant);
EvidenceKind parse_evidence_kind(std::string_view text);
Variant parse_variant(std::string_view text);

/// One retrieved fact. `index` is 1-based and equals the position in its set.
struct Evidence {
    int index = 0;
    EvidenceKind kind = EvidenceKind::CustomerReview;
    std::string text;
    /// Benchmark ground truth. Absent means unknown, not irrelevant.
    std::optional<bool> gold_relevant;

    friend bool operator==(const Evidence&, const Evidence&) = default;
};

/// Retrieved evidences in retrieval rank order.
class EvidenceSet {
public:
    EvidenceSet() = default;
    /// Validates index contiguity (1..n, in order) and non-empty texts.
    explicit EvidenceSet(std::vector<Evidence> evidences);

    std::size_t size() const noexcept { return evidences_.size(); }
    bool empty() const noexcept { return evidences_.empty(); }

    /// 1-based lookup. Throws on out-of-range indices.
    const Evidence& at(int index) const;
    bool contains(long long index) const noexcept {
        return index >= 1 && index <= static_cast<long long>(evidences_.size());
    }

    const std::vector<Evidence>& evidences() const noexcept { return evidences_; }
    auto begin() const noexcept { return evidences_.begin(); }
    auto end() const noexcept { return evidences_.end(); }

    friend bool operator==(const EvidenceSet&, const EvidenceSet&) = default;

private:
    std::vector<Evidence> evidences_;
};

struct QueryRecord {
    std::string id;
    std::string query;
    EvidenceSet evidence_set;

    friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

struct RawResponse {
    std::string text;
    Variant variant = Variant::Citation;

    friend bool operator==(const RawResponse&, const RawResponse&) = default;
};

/// One benchmark row: a query with its evidences and any generated responses.
struct BenchmarkRecord {
    QueryRecord query_record;
    std::map<Variant, RawResponse> responses;

    const std::string& id() const noexcept { return query_record.id; }
    const RawResponse* response(Variant variant) const;

    friend bool operator==(const BenchmarkRecord&, const BenchmarkRecord&) = default;
};

/// Parses one JSONL benchmark line. `line_number` is only used in messages.
BenchmarkRecord parse_benchmark_line(std::string_view line, std::size_t line_number = 0);
/// Serializes one record as a single JSON line (no trailing newline), keys sorted.
std::string format_benchmark_line(const BenchmarkRecord& record);

/// Reads a JSONL benchmark. Blank lines are skipped; ids must be unique.
std::vector<BenchmarkRecord> load_benchmark(const std::filesystem::path& path);
void save_benchmark(const std::vector<BenchmarkRecord>& records, const std::filesystem::path& path);

}  // namespace groundcheck
