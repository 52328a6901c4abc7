// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "leakscope/corpus.hpp"
#include "leakscope/io.hpp"
#include "leakscope/patterns.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace leakscope {

struct SensitiveMatch {
    SensitiveCategory category = SensitiveCategory::Secret;
    std::string provider;
    std::size_t start = 0;  // byte offsets, [start, end)
    std::size_t end = 0;
    std::string surface;

    std::size_t length() const { return end - start; }
    friend bool operator==(const SensitiveMatch&, const SensitiveMatch&) = default;
};

struct RecordScanResult {
    std::string record_id;
    std::vector<SensitiveMatch> matches;
    PerCategory<std::uint64_t> unique_counts{};

    friend bool operator==(const RecordScanResult&, const RecordScanResult&) = default;
};

/// Comparison key for surfaces: email domains fold to lowercase, the local
/// part and all phones/secrets stay byte-exact.
std::string normalize_surface(SensitiveCategory category, std::string_view surface);

/// Non-overlapping leftmost-longest matches of one category, sorted by start.
std::vector<SensitiveMatch> detect(const PatternTable& table, SensitiveCategory category,
                                   std::string_view text);
inline std::vector<SensitiveMatch> detect(SensitiveCategory category, std::string_view text) {
    return detect(PatternTable::builtin(), category, text);
}

/// All categories. Exact-span ties go to Secret, then Email, then Phone.
std::vector<SensitiveMatch> detect_all(const PatternTable& table, std::string_view text);

/// Throws UnsupportedLanguage for Language::Other.
RecordScanResult scan_record(const PatternTable& table, const CorpusRecord& record);
inline RecordScanResult scan_record(const CorpusRecord& record) {
    return scan_record(PatternTable::builtin(), record);
}

struct LanguageStats {
    std::uint64_t record_count = 0;
    PerCategory<std::uint64_t> records_with_match{};
    PerCategory<std::uint64_t> unique_match_total{};

    LanguageStats& operator+=(const LanguageStats& o);
    friend bool operator==(const LanguageStats&, const LanguageStats&) = default;
};

struct ScanErrors {
    std::uint64_t parse_errors = 0;
    std::uint64_t malformed_utf8 = 0;
    std::uint64_t duplicate_ids = 0;
    std::uint64_t skipped_other_language = 0;
    // First few diagnostics, "shard:line: message".
    std::vector<std::string> samples;

    friend bool operator==(const ScanErrors&, const ScanErrors&) = default;
};

struct ScanSummary {
    static constexpr int kSchemaVersion = 1;

    std::string release_label;
    std::string pattern_table_version;
    std::map<Language, LanguageStats> per_language;  // all seven scanned languages
    LanguageStats totals;
    // Distinct normalized surfaces across the whole corpus (not per file).
    PerCategory<std::uint64_t> corpus_distinct{};
    ScanErrors errors;

    Json to_json() const;
    static ScanSummary from_json(const Json& j);
    friend bool operator==(const ScanSummary&, const ScanSummary&) = default;
};

/// Order-insensitive merge state for scan results.
class ScanAccumulator {
public:
    void add(Language language, const RecordScanResult& result);
    void merge(const ScanAccumulator& other);
    ScanSummary finish(std::string release_label, std::string pattern_version,
                       const ScanErrors& errors) const;

private:
    std::map<Language, LanguageStats> per_language_;
    PerCategory<std::unordered_set<std::uint64_t>> distinct_;
};

/// Outcome of turning one corpus line into a scanned record.
struct LineOutcome {
    enum class Status { Ok, ParseError, MalformedUtf8, OtherLanguage };
    Status status = Status::Ok;
    CorpusRecord record;
    RecordScanResult result;
    std::string message;
};

/// Parses one shard line ({"id","text","ext","source"}).
/// Throws ShardParseError on malformed JSON or missing fields.
CorpusRecord parse_corpus_line(std::string_view line);
std::string corpus_line(const CorpusRecord& record);

// Data-parallel kernels. The serial versions are the reference the parallel
// ones are tested and benchmarked against; outputs are identical.
std::vector<RecordScanResult> scan_records_serial(const PatternTable& table,
                                                  std::span<const CorpusRecord> records);
std::vector<RecordScanResult> scan_records_parallel(const PatternTable& table,
                                                    std::span<const CorpusRecord> records);
std::vector<LineOutcome> process_lines_serial(const PatternTable& table,
                                              std::span<const std::string> lines);
std::vector<LineOutcome> process_lines_parallel(const PatternTable& table,
                                                std::span<const std::string> lines);

struct ScanConfig {
    std::string release_label = "unlabeled";
    std::size_t batch_lines = 4096;
    bool parallel = true;
    int threads = 0;  // 0 = OpenMP default
    std::size_t max_error_samples = 20;
};

/// Called once per scanned record, serially, in shard-then-line order.
using RecordSink = std::function<void(const CorpusRecord&, const RecordScanResult&)>;

ScanSummary scan_corpus(const PatternTable& table, std::vector<std::filesystem::path> shards,
                        const ScanConfig& config, const RecordSink& sink = {});

}  // namespace leakscope
