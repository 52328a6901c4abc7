// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "leakscope/corpus.hpp"
#include "leakscope/io.hpp"

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope {

struct IndexHit {
    SensitiveCategory category = SensitiveCategory::Secret;
    std::string surface;  // normalized
    std::size_t offset = 0;  // first occurrence in the searched text

    friend bool operator==(const IndexHit&, const IndexHit&) = default;
};

/// Every normalized surface harvested from a training corpus. Lookups are
/// substring searches: all surfaces are located in one pass over the text.
class SensitiveIndex {
public:
    static constexpr int kSchemaVersion = 1;

    SensitiveIndex() = default;
    SensitiveIndex(std::string release_label, std::string pattern_version);

    /// Normalizes before storing.
    void insert(SensitiveCategory category, std::string_view surface);

    /// Distinct index surfaces occurring in `text`, ordered by first offset.
    /// Emails match with a case-insensitive domain; everything else is exact.
    std::vector<IndexHit> find_in(std::string_view text) const;
    bool contains_any(std::string_view text) const { return !find_in(text).empty(); }

    std::size_t size() const;
    const std::set<std::string>& surfaces(SensitiveCategory c) const { return surfaces_[index_of(c)]; }
    const std::string& release_label() const { return release_label_; }
    const std::string& pattern_version() const { return pattern_version_; }

    Json to_json() const;
    static SensitiveIndex from_json(const Json& j);

private:
    struct Automaton;
    std::shared_ptr<const Automaton> automaton() const;

    std::string release_label_;
    std::string pattern_version_;
    PerCategory<std::set<std::string>> surfaces_;
    mutable std::shared_ptr<const Automaton> automaton_;
};

}  // namespace leakscope
