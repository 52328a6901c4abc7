// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "leakscope/corpus.hpp"
#include "leakscope/io.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace leakscope {

/// Seeded code corpus with planted sensitive strings and known ground truth.
/// Every planted surface is distinct, pattern-conformant, quoted or
/// space-delimited, one per record, and at least `min_offset` bytes in.
struct SynthConfig {
    std::size_t records = 10000;
    std::size_t emails = 150;
    std::size_t phones = 80;
    std::size_t secrets = 40;
    std::uint64_t seed = 1;
    std::size_t min_offset = 48;
    // Records with unscanned extensions (markdown, text). They carry decoy
    // emails that a correct scan skips.
    std::size_t other_language_records = 200;
};

struct PlantedItem {
    std::string record_id;
    Language language = Language::Other;
    SensitiveCategory category = SensitiveCategory::Email;
    std::string provider;  // generator family, e.g. "aws_access_key_id"
    std::string surface;
    std::size_t offset = 0;

    Json to_json() const;
    static PlantedItem from_json(const Json& j);
};

struct ExpectedLanguage {
    std::uint64_t record_count = 0;
    PerCategory<std::uint64_t> planted{};
};

struct SynthCorpus {
    std::vector<CorpusRecord> records;
    std::vector<PlantedItem> planted;  // in record order
    std::vector<PlantedItem> decoys;   // inside unscanned records
    std::map<Language, ExpectedLanguage> expected;

    PerCategory<std::uint64_t> planted_totals() const;
    /// Counts and per-language splits only; no surfaces.
    Json expected_json() const;
};

/// Throws DomainError when the requested plants exceed the scannable records.
SynthCorpus generate_corpus(const SynthConfig& config);

struct SynthPaths {
    std::vector<std::filesystem::path> shards;
    std::filesystem::path expected;  // counts, safe to share
    std::filesystem::path planted;   // sensitive/, mode 0600
};

/// Writes `shards` gzip JSON-lines shards plus ground truth under `dir`.
SynthPaths write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir,
                        std::size_t shards = 4);

}  // namespace leakscope
