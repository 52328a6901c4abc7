// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "leakscope/corpus.hpp"
#include "leakscope/io.hpp"
#include "leakscope/patterns.hpp"
#include "leakscope/scanner.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace leakscope {

inline constexpr std::string_view kMaskToken = "MASK";

struct GroundTruthSecret {
    std::string secret_id;  // "<case_id>#<n>"
    std::string case_id;
    std::string record_id;
    SensitiveCategory category = SensitiveCategory::Secret;
    std::string provider;
    std::string surface;  // empty when loaded without the ground-truth file
    std::size_t masked_start = 0;
    std::size_t masked_end = 0;

    friend bool operator==(const GroundTruthSecret&, const GroundTruthSecret&) = default;
};

struct MaskedCase {
    std::string case_id;
    std::string record_id;
    std::string masked_text;
    std::vector<GroundTruthSecret> secrets;  // sorted by masked_start
    Language language = Language::Other;

    const GroundTruthSecret* find_secret(std::string_view secret_id) const;
    friend bool operator==(const MaskedCase&, const MaskedCase&) = default;
};

struct AssessmentDataset {
    static constexpr int kSchemaVersion = 1;

    std::string release_label;
    std::vector<MaskedCase> cases;
    std::uint64_t sampling_seed = 0;
    std::size_t max_cases_per_category = 0;
    std::string mask_token{kMaskToken};
    std::string pattern_table_version;
    std::vector<std::string> corpus_ids;

    const MaskedCase* find_case(std::string_view case_id) const;
};

/// Replaces every match span with the mask token. Throws NoMatches when the
/// scan found nothing and MaskResidue if the masked text still scans dirty.
MaskedCase mask_record(const PatternTable& table, const CorpusRecord& record,
                       const RecordScanResult& result, std::string case_id,
                       std::string_view mask_token = kMaskToken);

/// Inverse of mask_record; needs surfaces. Applies secrets right to left.
std::string unmask(const MaskedCase& masked);

struct DatasetConfig {
    std::string release_label = "unlabeled";
    std::size_t max_cases_per_category = 100;  // 0 = no cap
    std::uint64_t seed = 0;
    std::string mask_token{kMaskToken};
};

/// Category a multi-secret case is counted under: Secret > Email > Phone.
SensitiveCategory primary_category(const RecordScanResult& result);

/// Collects scan output, then samples and masks it. Single-writer.
class AssessmentBuilder {
public:
    AssessmentBuilder(const PatternTable& table, DatasetConfig config);

    void add(const CorpusRecord& record, const RecordScanResult& result);
    void set_corpus_ids(std::vector<std::string> ids) { corpus_ids_ = std::move(ids); }

    /// Throws EmptyScan when no added record contained matches.
    AssessmentDataset build() const;

private:
    const PatternTable* table_;
    DatasetConfig config_;
    std::vector<std::pair<CorpusRecord, RecordScanResult>> matching_;
    std::vector<std::string> corpus_ids_;
};

/// Deterministic, platform-independent Fisher-Yates over mt19937_64.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed);

struct DatasetPaths {
    std::filesystem::path cases;  // gzip JSON-lines, no surfaces
    std::filesystem::path truth;  // gzip JSON-lines, SENSITIVE header, mode 0600
    std::filesystem::path meta;   // JSON
};

DatasetPaths dataset_paths(const std::filesystem::path& out_dir);
void write_dataset(const AssessmentDataset& dataset, const DatasetPaths& paths);
/// `truth` may be empty; secrets then carry no surfaces.
AssessmentDataset read_dataset(const std::filesystem::path& meta,
                               const std::filesystem::path& cases,
                               const std::filesystem::path& truth = {});

}  // namespace leakscope

#include "leakscope/detail/shuffle.hpp"
