// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "groundcheck/error.hpp"
#include "groundcheck/rational.hpp"

namespace groundcheck {

using nlohmann::json;

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string format_fixed(const Rational& value, int places) {
    using boost::multiprecision::cpp_int;
    cpp_int scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    bool negative = value < 0;
    Rational magnitude = negative ? Rational(-value) : value;
    Rational scaled = magnitude * scale;
    cpp_int num = boost::multiprecision::numerator(scaled);
    cpp_int den = boost::multiprecision::denominator(scaled);
    cpp_int rounded = (2 * num + den) / (2 * den);  // half up
    cpp_int whole = rounded / scale;
    cpp_int frac = rounded % scale;
    std::string frac_digits = frac.str();
    if (static_cast<int>(frac_digits.size()) < places) frac_digits.insert(0, places - frac_digits.size(), '0');
    std::string out = (negative && rounded != 0) ? "-" : "";
    out += whole.str();
    if (places > 0) out += "." + frac_digits;
    return out;
}

ReportFormat parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::Json;
    if (text == "markdown" || text == "md") return ReportFormat::Markdown;
    throw_validation(fmt::format("unknown report format '{}'", text));
}

namespace {

// Placeholder float values are rendered from the exact rational they index.
struct FixedRates {
    std::vector<Rational> values;

    json add(const std::optional<Rational>& rate) {
        if (!rate) return nullptr;
        values.push_back(*rate);
        return json::binary({}, static_cast<std::uint64_t>(values.size() - 1));
    }
};

void write_json(std::ostream& out, const json& j, const FixedRates& rates, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out << "{}";
                return;
            }
            out << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out << ",\n";
                first = false;
                out << inner << json(it.key()).dump() << ": ";
                write_json(out, it.value(), rates, depth + 1);
            }
            out << "\n" << pad << "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out << "[]";
                return;
            }
            out << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out << ",\n";
                out << inner;
                write_json(out, j[i], rates, depth + 1);
            }
            out << "\n" << pad << "]";
            return;
        }
        case json::value_t::binary:
            out << format_fixed(rates.values.at(j.get_binary().subtype()));
            return;
        default:
            out << j.dump();
    }
}

json counts_to_json(const ResponseCounts& c) {
    return json{{"m", c.m},         {"m_ground", c.m_ground}, {"r", c.r},
                {"r_entail", c.r_entail}, {"n", c.n},         {"n_cited", c.n_cited},
                {"n_pcited", c.n_pcited}, {"k_ground", c.k_ground}, {"E", c.E}};
}

std::vector<MetricsReport> canonical_order(std::vector<MetricsReport> reports) {
    std::stable_sort(reports.begin(), reports.end(), [](const MetricsReport& a, const MetricsReport& b) {
        if (a.id != b.id) return a.id < b.id;
        return a.variant < b.variant;
    });
    return reports;
}

std::string render_json(const std::vector<MetricsReport>& reports, AggregationMode mode) {
    FixedRates rates;
    json per_record = json::array();
    for (const MetricsReport& r : reports) {
        json row;
        row["id"] = r.id;
        row["variant"] = std::string(to_string(r.variant));
        for (Metric m : kAllMetrics) row[std::string(to_string(m))] = rates.add(r.get(m));
        row["refusal"] = r.refusal;
        row["counts"] = counts_to_json(r.counts);
        per_record.push_back(std::move(row));
    }
    AggregateReport agg = aggregate_corpus(reports, mode);
    json aggregate;
    json undefined = json::object();
    for (Metric m : kAllMetrics) {
        aggregate[std::string(to_string(m))] = rates.add(agg.metrics[m].value);
        undefined[std::string(to_string(m))] = agg.metrics[m].undefined_records;
    }
    aggregate["mode"] = std::string(to_string(mode));
    aggregate["records"] = agg.records;
    aggregate["undefined"] = std::move(undefined);

    json root;
    root["per_record"] = std::move(per_record);
    root["aggregate"] = std::move(aggregate);
    std::ostringstream out;
    write_json(out, root, rates, 0);
    out << '\n';
    return out.str();
}

std::string cell(const std::optional<Rational>& rate) { return rate ? format_fixed(*rate) : "n/a"; }

std::string render_markdown(const std::vector<MetricsReport>& reports, AggregationMode mode) {
    std::string out = "# groundcheck report\n\n";
    out += "| id | variant | CGR | CCR | PSR | SCR | EUR | refusal |\n";
    out += "|---|---|---|---|---|---|---|---|\n";
    for (const MetricsReport& r : reports) {
        out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} |\n", r.id, to_string(r.variant), cell(r.cgr),
                           cell(r.ccr), cell(r.psr), cell(r.scr), cell(r.eur), r.refusal ? "yes" : "no");
    }
    AggregateReport agg = aggregate_corpus(reports, mode);
    out += fmt::format("\n## Aggregate ({}, {} records)\n\n", to_string(mode), agg.records);
    out += "| metric | value | undefined records |\n";
    out += "|---|---|---|\n";
    for (Metric m : kAllMetrics) {
        std::string name(to_string(m));
        std::transform(name.begin(), name.end(), name.begin(), [](char c) { return static_cast<char>(c - 'a' + 'A'); });
        out += fmt::format("| {} | {} | {} |\n", name, cell(agg.metrics[m].value), agg.metrics[m].undefined_records);
    }
    return out;
}

}  // namespace

std::string render_report(const std::vector<MetricsReport>& reports, ReportFormat format, AggregationMode mode) {
    auto ordered = canonical_order(reports);
    return format == ReportFormat::Json ? render_json(ordered, mode) : render_markdown(ordered, mode);
}

void save_report(const std::vector<MetricsReport>& reports, const std::filesystem::path& path, ReportFormat format,
                 AggregationMode mode) {
    std::string text = render_report(reports, format, mode);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io(fmt::format("cannot write report '{}'", path.string()));
    out << text;
    if (!out) throw_io(fmt::format("write failed for '{}'", path.string()));
}

std::vector<MetricsReport> load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io(fmt::format("cannot read report '{}'", path.string()));
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw_validation(fmt::format("report '{}' is not valid JSON: {}", path.string(), e.what()));
    }
    auto rows = root.find("per_record");
    if (!root.is_object() || rows == root.end() || !rows->is_array()) {
        throw_validation(fmt::format("report '{}' has no per_record array", path.string()));
    }
    std::vector<MetricsReport> reports;
    try {
        for (const json& row : *rows) {
            const json& c = row.at("counts");
            ResponseCounts counts;
            counts.m = c.at("m").get<std::int64_t>();
            counts.m_ground = c.at("m_ground").get<std::int64_t>();
            counts.r = c.at("r").get<std::int64_t>();
            counts.r_entail = c.at("r_entail").get<std::int64_t>();
            counts.n = c.at("n").get<std::int64_t>();
            counts.n_cited = c.at("n_cited").get<std::int64_t>();
            counts.n_pcited = c.at("n_pcited").get<std::int64_t>();
            counts.k_ground = c.at("k_ground").get<std::int64_t>();
            counts.E = c.at("E").get<std::int64_t>();
            reports.push_back(MetricsReport::from_counts(row.at("id").get<std::string>(),
                                                         parse_variant(row.at("variant").get<std::string>()), counts,
                                                         row.at("refusal").get<bool>()));
        }
    } catch (const json::exception& e) {
        throw_validation(fmt::format("report '{}' has a malformed row: {}", path.string(), e.what()));
    }
    return reports;
}

}  // namespace groundcheck
