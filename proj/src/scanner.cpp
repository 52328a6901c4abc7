// SPDX-License-Identifier: Apache-2.0
#include "leakscope/scanner.hpp"

#include "leakscope/errors.hpp"
#include "leakscope/util.hpp"

#include <omp.h>

#include <algorithm>
#include <set>
#include <tuple>

namespace leakscope {

namespace {

// Greedy leftmost-longest selection. Ordering: earliest start, then longest,
// then category priority, then pattern order.
template <typename T, typename Key>
std::vector<T> resolve_overlaps(std::vector<T> items, Key key) {
    std::sort(items.begin(), items.end(), [&](const T& a, const T& b) { return key(a) < key(b); });
    std::vector<T> out;
    std::size_t last_end = 0;
    for (auto& it : items) {
        const auto [start, neg_len, prio, tie] = key(it);
        (void)prio;
        (void)tie;
        if (!out.empty() && start < last_end) continue;
        last_end = start + static_cast<std::size_t>(-neg_len);
        out.push_back(std::move(it));
    }
    return out;
}

SensitiveMatch to_match(const PatternTable& table, const Candidate& c, std::string_view text) {
    return {c.category, table.specs()[c.pattern_index].provider, c.start, c.end,
            std::string(text.substr(c.start, c.end - c.start))};
}

PerCategory<std::uint64_t> unique_counts_of(const std::vector<SensitiveMatch>& matches) {
    PerCategory<std::set<std::string>> seen;
    for (const auto& m : matches)
        seen[index_of(m.category)].insert(normalize_surface(m.category, m.surface));
    PerCategory<std::uint64_t> counts{};
    for (std::size_t c = 0; c < 3; ++c) counts[c] = seen[c].size();
    return counts;
}

Json stats_to_json(const LanguageStats& s) {
    Json rwm, umt;
    for (auto c : kCategories) {
        rwm[std::string(to_string(c))] = s.records_with_match[index_of(c)];
        umt[std::string(to_string(c))] = s.unique_match_total[index_of(c)];
    }
    return Json{{"record_count", s.record_count},
                {"records_with_match", std::move(rwm)},
                {"unique_match_total", std::move(umt)}};
}

LanguageStats stats_from_json(const Json& j) {
    LanguageStats s;
    s.record_count = j.at("record_count").get<std::uint64_t>();
    for (auto c : kCategories) {
        const std::string key(to_string(c));
        s.records_with_match[index_of(c)] = j.at("records_with_match").at(key).get<std::uint64_t>();
        s.unique_match_total[index_of(c)] = j.at("unique_match_total").at(key).get<std::uint64_t>();
    }
    return s;
}

LineOutcome process_line(const PatternTable& table, const std::string& line) {
    LineOutcome out;
    if (!is_valid_utf8(line)) {
        out.status = LineOutcome::Status::MalformedUtf8;
        out.message = "invalid UTF-8";
        return out;
    }
    try {
        out.record = parse_corpus_line(line);
    } catch (const ShardParseError& e) {
        out.status = LineOutcome::Status::ParseError;
        out.message = e.what();
        return out;
    }
    if (out.record.language == Language::Other) {
        out.status = LineOutcome::Status::OtherLanguage;
        return out;
    }
    out.result = scan_record(table, out.record);
    return out;
}

}  // namespace

std::string normalize_surface(SensitiveCategory category, std::string_view surface) {
    if (category != SensitiveCategory::Email) return std::string(surface);
    const auto at = surface.rfind('@');
    if (at == std::string_view::npos) return std::string(surface);
    std::string out(surface.substr(0, at + 1));
    out += ascii_lower(surface.substr(at + 1));
    return out;
}

std::vector<SensitiveMatch> detect(const PatternTable& table, SensitiveCategory category,
                                   std::string_view text) {
    std::vector<Candidate> cands;
    table.candidates(category, text, cands);
    cands = resolve_overlaps(std::move(cands), [](const Candidate& c) {
        return std::make_tuple(c.start, -static_cast<long long>(c.end - c.start),
                               priority_rank(c.category), c.pattern_index);
    });
    std::vector<SensitiveMatch> out;
    out.reserve(cands.size());
    for (const auto& c : cands) out.push_back(to_match(table, c, text));
    return out;
}

std::vector<SensitiveMatch> detect_all(const PatternTable& table, std::string_view text) {
    std::vector<SensitiveMatch> all;
    for (auto c : kCategories) {
        auto m = detect(table, c, text);
        all.insert(all.end(), std::make_move_iterator(m.begin()), std::make_move_iterator(m.end()));
    }
    return resolve_overlaps(std::move(all), [](const SensitiveMatch& m) {
        return std::make_tuple(m.start, -static_cast<long long>(m.length()),
                               priority_rank(m.category), std::string_view(m.provider));
    });
}

RecordScanResult scan_record(const PatternTable& table, const CorpusRecord& record) {
    if (record.language == Language::Other)
        throw UnsupportedLanguage("record " + record.id + " has extension '" + record.extension +
                                  "'");
    RecordScanResult r;
    r.record_id = record.id;
    r.matches = detect_all(table, record.text);
    r.unique_counts = unique_counts_of(r.matches);
    return r;
}

LanguageStats& LanguageStats::operator+=(const LanguageStats& o) {
    record_count += o.record_count;
    for (std::size_t c = 0; c < 3; ++c) {
        records_with_match[c] += o.records_with_match[c];
        unique_match_total[c] += o.unique_match_total[c];
    }
    return *this;
}

void ScanAccumulator::add(Language language, const RecordScanResult& result) {
    auto& s = per_language_[language];
    ++s.record_count;
    for (std::size_t c = 0; c < 3; ++c) {
        s.unique_match_total[c] += result.unique_counts[c];
        if (result.unique_counts[c] > 0) ++s.records_with_match[c];
    }
    for (const auto& m : result.matches)
        distinct_[index_of(m.category)].insert(fnv1a64(normalize_surface(m.category, m.surface)));
}

void ScanAccumulator::merge(const ScanAccumulator& other) {
    for (const auto& [lang, stats] : other.per_language_) per_language_[lang] += stats;
    for (std::size_t c = 0; c < 3; ++c)
        distinct_[c].insert(other.distinct_[c].begin(), other.distinct_[c].end());
}

ScanSummary ScanAccumulator::finish(std::string release_label, std::string pattern_version,
                                    const ScanErrors& errors) const {
    ScanSummary s;
    s.release_label = std::move(release_label);
    s.pattern_table_version = std::move(pattern_version);
    for (Language l : kScannedLanguages) {
        auto it = per_language_.find(l);
        s.per_language[l] = it == per_language_.end() ? LanguageStats{} : it->second;
        s.totals += s.per_language[l];
    }
    for (std::size_t c = 0; c < 3; ++c) s.corpus_distinct[c] = distinct_[c].size();
    s.errors = errors;
    return s;
}

Json ScanSummary::to_json() const {
    Json langs = Json::object();
    for (Language l : kScannedLanguages) {
        auto it = per_language.find(l);
        langs[std::string(to_string(l))] =
            stats_to_json(it == per_language.end() ? LanguageStats{} : it->second);
    }
    Json distinct;
    for (auto c : kCategories) distinct[std::string(to_string(c))] = corpus_distinct[index_of(c)];
    return Json{{"schema_version", kSchemaVersion},
                {"kind", "scan_summary"},
                {"release_label", release_label},
                {"pattern_table_version", pattern_table_version},
                {"per_language", std::move(langs)},
                {"totals", stats_to_json(totals)},
                {"corpus_distinct", std::move(distinct)},
                {"errors",
                 {{"parse_errors", errors.parse_errors},
                  {"malformed_utf8", errors.malformed_utf8},
                  {"duplicate_ids", errors.duplicate_ids},
                  {"skipped_other_language", errors.skipped_other_language},
                  {"samples", errors.samples}}}};
}

ScanSummary ScanSummary::from_json(const Json& j) {
    try {
        if (j.at("kind") != "scan_summary") throw SchemaMismatch("not a scan summary");
        if (j.at("schema_version").get<int>() != kSchemaVersion)
            throw SchemaMismatch("unsupported scan summary schema version " +
                                 j.at("schema_version").dump());
        ScanSummary s;
        s.release_label = j.at("release_label").get<std::string>();
        s.pattern_table_version = j.at("pattern_table_version").get<std::string>();
        for (const auto& [name, stats] : j.at("per_language").items()) {
            const auto lang = parse_language(name);
            if (!lang || *lang == Language::Other) throw SchemaMismatch("unknown language " + name);
            s.per_language[*lang] = stats_from_json(stats);
        }
        s.totals = stats_from_json(j.at("totals"));
        for (auto c : kCategories)
            s.corpus_distinct[index_of(c)] =
                j.at("corpus_distinct").at(std::string(to_string(c))).get<std::uint64_t>();
        const auto& e = j.at("errors");
        s.errors.parse_errors = e.at("parse_errors").get<std::uint64_t>();
        s.errors.malformed_utf8 = e.at("malformed_utf8").get<std::uint64_t>();
        s.errors.duplicate_ids = e.at("duplicate_ids").get<std::uint64_t>();
        s.errors.skipped_other_language = e.at("skipped_other_language").get<std::uint64_t>();
        s.errors.samples = e.at("samples").get<std::vector<std::string>>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(std::string("malformed scan summary: ") + e.what());
    }
}

CorpusRecord parse_corpus_line(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ShardParseError(e.what());
    }
    if (!j.is_object()) throw ShardParseError("line is not a JSON object");
    const auto field = [&](const char* name) -> std::string {
        auto it = j.find(name);
        if (it == j.end() || !it->is_string())
            throw ShardParseError(std::string("missing string field '") + name + "'");
        return it->get<std::string>();
    };
    CorpusRecord r;
    r.id = field("id");
    if (r.id.empty()) throw ShardParseError("empty id");
    r.text = field("text");
    r.extension = field("ext");
    auto src = j.find("source");
    if (src != j.end() && src->is_string()) r.source_tag = src->get<std::string>();
    r.language = language_from_extension(r.extension);
    return r;
}

std::string corpus_line(const CorpusRecord& record) {
    return Json{{"id", record.id},
                {"text", record.text},
                {"ext", record.extension},
                {"source", record.source_tag}}
        .dump();
}

std::vector<RecordScanResult> scan_records_serial(const PatternTable& table,
                                                  std::span<const CorpusRecord> records) {
    std::vector<RecordScanResult> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(scan_record(table, r));
    return out;
}

std::vector<RecordScanResult> scan_records_parallel(const PatternTable& table,
                                                    std::span<const CorpusRecord> records) {
    std::vector<RecordScanResult> out(records.size());
    const auto n = static_cast<std::ptrdiff_t>(records.size());
    // scan_record throws only for Other; validate up front so no exception
    // escapes the parallel region.
    for (const auto& r : records)
        if (r.language == Language::Other)
            throw UnsupportedLanguage("record " + r.id + " has extension '" + r.extension + "'");
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = scan_record(table, records[i]);
    return out;
}

std::vector<LineOutcome> process_lines_serial(const PatternTable& table,
                                              std::span<const std::string> lines) {
    std::vector<LineOutcome> out;
    out.reserve(lines.size());
    for (const auto& l : lines) out.push_back(process_line(table, l));
    return out;
}

std::vector<LineOutcome> process_lines_parallel(const PatternTable& table,
                                                std::span<const std::string> lines) {
    std::vector<LineOutcome> out(lines.size());
    const auto n = static_cast<std::ptrdiff_t>(lines.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = process_line(table, lines[i]);
    return out;
}

ScanSummary scan_corpus(const PatternTable& table, std::vector<std::filesystem::path> shards,
                        const ScanConfig& config, const RecordSink& sink) {
    std::sort(shards.begin(), shards.end());
    if (config.threads > 0) omp_set_num_threads(config.threads);

    ScanAccumulator acc;
    ScanErrors errors;
    std::unordered_set<std::uint64_t> seen_ids;
    const auto note = [&](const std::string& msg) {
        if (errors.samples.size() < config.max_error_samples) errors.samples.push_back(msg);
    };

    std::vector<std::string> batch;
    std::vector<std::size_t> batch_line_numbers;
    for (const auto& shard : shards) {
        if (!std::filesystem::exists(shard)) throw IoError("shard not found: " + shard.string());
        GzLineReader reader(shard);
        const auto flush = [&] {
            auto outcomes = config.parallel ? process_lines_parallel(table, batch)
                                            : process_lines_serial(table, batch);
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                auto& o = outcomes[i];
                const std::string where =
                    shard.filename().string() + ":" + std::to_string(batch_line_numbers[i]);
                switch (o.status) {
                    case LineOutcome::Status::ParseError:
                        ++errors.parse_errors;
                        note(where + ": " + o.message);
                        continue;
                    case LineOutcome::Status::MalformedUtf8:
                        ++errors.malformed_utf8;
                        note(where + ": " + o.message);
                        continue;
                    case LineOutcome::Status::OtherLanguage:
                        ++errors.skipped_other_language;
                        continue;
                    case LineOutcome::Status::Ok:
                        break;
                }
                if (!seen_ids.insert(fnv1a64(o.record.id)).second) {
                    ++errors.duplicate_ids;
                    note(where + ": duplicate id " + o.record.id);
                    continue;
                }
                acc.add(o.record.language, o.result);
                if (sink) sink(o.record, o.result);
            }
            batch.clear();
            batch_line_numbers.clear();
        };

        std::string line;
        while (reader.next(line)) {
            if (line.empty()) continue;
            batch.push_back(std::move(line));
            batch_line_numbers.push_back(reader.line_number());
            if (batch.size() >= config.batch_lines) flush();
        }
        if (!batch.empty()) flush();
    }
    return acc.finish(config.release_label, table.version(), errors);
}

}  // namespace leakscope
