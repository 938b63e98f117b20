// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/model.hpp"

#include <fstream>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "groundcheck/error.hpp"

namespace groundcheck {

using nlohmann::json;

std::string_view to_string(EvidenceKind kind) {
    switch (kind) {
        case EvidenceKind::ProductDescription: return "description";
        case EvidenceKind::CustomerReview: return "review";
        case EvidenceKind::QnA: return "qna";
    }
    return "review";
}

std::string_view to_string(Variant variant) {
    switch (variant) {
        case Variant::Vanilla: return "vanilla";
        case Variant::Guided: return "guided";
        case Variant::Citation: return "citation";
    }
    return "citation";
}

EvidenceKind parse_evidence_kind(std::string_view text) {
    if (text == "description") return EvidenceKind::ProductDescription;
    if (text == "review") return EvidenceKind::CustomerReview;
    if (text == "qna") return EvidenceKind::QnA;
    throw_validation(fmt::format("unknown evidence kind '{}'", text));
}

Variant parse_variant(std::string_view text) {
    if (text == "vanilla") return Variant::Vanilla;
    if (text == "guided") return Variant::Guided;
    if (text == "citation") return Variant::Citation;
    throw_validation(fmt::format("unknown variant '{}'", text));
}

EvidenceSet::EvidenceSet(std::vector<Evidence> evidences) : evidences_(std::move(evidences)) {
    for (std::size_t i = 0; i < evidences_.size(); ++i) {
        const Evidence& e = evidences_[i];
        if (e.index != static_cast<int>(i) + 1) {
            throw_validation(fmt::format("evidence at position {} has index {} (indices must run 1..{} in order)",
                                         i + 1, e.index, evidences_.size()));
        }
        if (e.text.empty()) throw_validation(fmt::format("evidence {} has empty text", e.index));
    }
}

const Evidence& EvidenceSet::at(int index) const {
    if (!contains(index)) {
        throw_validation(fmt::format("evidence index {} out of range 1..{}", index, evidences_.size()));
    }
    return evidences_[static_cast<std::size_t>(index - 1)];
}

const RawResponse* BenchmarkRecord::response(Variant variant) const {
    auto it = responses.find(variant);
    return it == responses.end() ? nullptr : &it->second;
}

namespace {

template <typename T>
T required(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw_validation(fmt::format("missing field '{}'", key));
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw_validation(fmt::format("field '{}' has the wrong type", key));
    }
}

BenchmarkRecord record_from_json(const json& j) {
    if (!j.is_object()) throw_validation("record is not a JSON object");
    BenchmarkRecord record;
    record.query_record.id = required<std::string>(j, "id");
    record.query_record.query = required<std::string>(j, "query");

    auto evs = j.find("evidences");
    if (evs == j.end() || !evs->is_array()) throw_validation("missing array field 'evidences'");
    std::vector<Evidence> evidences;
    std::set<long long> seen;
    for (const json& ej : *evs) {
        if (!ej.is_object()) throw_validation("evidence is not a JSON object");
        Evidence e;
        auto index = required<long long>(ej, "index");
        if (!seen.insert(index).second) throw_validation(fmt::format("duplicate evidence index {}", index));
        if (index < 1 || index > std::numeric_limits<int>::max()) {
            throw_validation(fmt::format("evidence index {} must be >= 1", index));
        }
        e.index = static_cast<int>(index);
        e.kind = parse_evidence_kind(required<std::string>(ej, "kind"));
        e.text = required<std::string>(ej, "text");
        if (auto g = ej.find("gold_relevant"); g != ej.end() && !g->is_null()) {
            if (!g->is_boolean()) throw_validation("field 'gold_relevant' must be a boolean");
            e.gold_relevant = g->get<bool>();
        }
        evidences.push_back(std::move(e));
    }
    record.query_record.evidence_set = EvidenceSet(std::move(evidences));

    if (auto rs = j.find("responses"); rs != j.end() && !rs->is_null()) {
        if (!rs->is_object()) throw_validation("field 'responses' must be an object");
        for (const auto& [key, value] : rs->items()) {
            if (!value.is_string()) throw_validation(fmt::format("response '{}' must be a string", key));
            Variant v = parse_variant(key);
            record.responses[v] = RawResponse{value.get<std::string>(), v};
        }
    }
    return record;
}

json record_to_json(const BenchmarkRecord& record) {
    json j;
    j["id"] = record.query_record.id;
    j["query"] = record.query_record.query;
    json evs = json::array();
    for (const Evidence& e : record.query_record.evidence_set) {
        json ej;
        ej["index"] = e.index;
        ej["kind"] = std::string(to_string(e.kind));
        ej["text"] = e.text;
        if (e.gold_relevant) ej["gold_relevant"] = *e.gold_relevant;
        evs.push_back(std::move(ej));
    }
    j["evidences"] = std::move(evs);
    if (!record.responses.empty()) {
        json rs = json::object();
        for (const auto& [variant, response] : record.responses) rs[std::string(to_string(variant))] = response.text;
        j["responses"] = std::move(rs);
    }
    return j;
}

}  // namespace

BenchmarkRecord parse_benchmark_line(std::string_view line, std::size_t line_number) {
    try {
        return record_from_json(json::parse(line));
    } catch (const json::parse_error& e) {
        throw_validation(fmt::format("line {}: malformed JSON ({})", line_number, e.what()));
    } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("line {}: {}", line_number, e.what()));
    }
}

std::string format_benchmark_line(const BenchmarkRecord& record) {
    return record_to_json(record).dump(-1, ' ', false, json::error_handler_t::strict);
}

std::vector<BenchmarkRecord> load_benchmark(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io(fmt::format("cannot open benchmark '{}'", path.string()));
    std::vector<BenchmarkRecord> records;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        BenchmarkRecord record = parse_benchmark_line(line, line_number);
        if (!ids.insert(record.id()).second) {
            throw_validation(fmt::format("line {}: duplicate id '{}'", line_number, record.id()));
        }
        records.push_back(std::move(record));
    }
    return records;
}

void save_benchmark(const std::vector<BenchmarkRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io(fmt::format("cannot write benchmark '{}'", path.string()));
    for (const BenchmarkRecord& record : records) out << format_benchmark_line(record) << '\n';
    if (!out) throw_io(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace groundcheck
