// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "leakscope/corpus.hpp"
#include "leakscope/io.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope {

struct PatternSpec {
    std::string provider;
    SensitiveCategory category = SensitiveCategory::Secret;
    std::string pattern;  // Perl-syntax regular expression
    // Literal that every match contains. When set, texts without it skip the regex.
    std::string required;
};

/// Raw candidate produced by a single pattern, before overlap resolution.
struct Candidate {
    std::size_t start = 0;
    std::size_t end = 0;
    SensitiveCategory category = SensitiveCategory::Secret;
    std::size_t pattern_index = 0;
};

/// Versioned, immutable set of compiled detection patterns. Cheap to copy;
/// compiled state is shared and safe to use from many threads.
class PatternTable {
public:
    PatternTable(std::string version, std::vector<PatternSpec> specs);

    static const PatternTable& builtin();
    static PatternTable from_json(const Json& j);
    static PatternTable from_file(const std::filesystem::path& path);
    Json to_json() const;

    const std::string& version() const { return version_; }
    const std::vector<PatternSpec>& specs() const { return specs_; }
    const PatternSpec* find(std::string_view provider) const;

    /// All non-overlapping leftmost matches of every pattern in `category`.
    void candidates(SensitiveCategory category, std::string_view text,
                    std::vector<Candidate>& out) const;

    /// True when `surface` is matched in full by the provider's pattern.
    bool matches_whole(std::string_view provider, std::string_view surface) const;
    /// True when some pattern of `category` matches `surface` in full.
    bool category_matches_whole(SensitiveCategory category, std::string_view surface) const;

private:
    struct Compiled;
    std::string version_;
    std::vector<PatternSpec> specs_;
    std::shared_ptr<const Compiled> compiled_;
};

}  // namespace leakscope
