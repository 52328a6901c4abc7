// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "leakscope/corpus.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope {

/// Deterministic memorizing model. Every W-byte window of every training
/// record maps to the verbatim text that followed it; completion looks up
/// the prompt's trailing window and replays that continuation.
class Oracle {
public:
    static constexpr std::size_t kDefaultWindow = 32;
    static constexpr std::string_view kDefaultOutput = "    pass\n";

    struct Entry {
        std::uint64_t hash;
        std::uint32_t record;
        std::uint32_t position;  // split point; window is [position - W, position)
    };

    std::size_t window() const { return window_; }
    const std::string& default_output() const { return default_output_; }
    void set_default_output(std::string text) { default_output_ = std::move(text); }
    std::size_t entry_count() const { return entries_.size(); }

    /// Full continuation (to the end of its record) for an indexed window.
    /// Ambiguous windows resolve to the lexicographically smallest one.
    bool lookup(std::string_view window, std::string_view& continuation) const;

    /// Number of distinct indexed positions whose window equals `window`.
    std::size_t occurrences(std::string_view window) const;

    friend Oracle build_oracle_serial(std::span<const CorpusRecord>, std::size_t);
    friend Oracle build_oracle_parallel(std::span<const CorpusRecord>, std::size_t);

private:
    std::size_t window_ = kDefaultWindow;
    std::string default_output_{kDefaultOutput};
    std::vector<std::string> texts_;
    std::vector<Entry> entries_;  // sorted by (hash, record, position)

    template <typename F>
    void for_each_match(std::string_view window, F&& f) const;
};

/// Polynomial hash of a window; shared by index build and lookup.
std::uint64_t window_hash(std::string_view window);

/// Throws DomainError when W < 4 or records is empty.
Oracle build_oracle_serial(std::span<const CorpusRecord> records, std::size_t window);
Oracle build_oracle_parallel(std::span<const CorpusRecord> records, std::size_t window);
inline Oracle build_oracle(std::span<const CorpusRecord> records,
                           std::size_t window = Oracle::kDefaultWindow) {
    return build_oracle_parallel(records, window);
}

/// Last W bytes of the prompt → stored continuation truncated to
/// `max_new_tokens` bytes (at a UTF-8 boundary); otherwise the default output.
std::string oracle_complete(const Oracle& oracle, std::string_view prompt,
                            std::size_t max_new_tokens = 256);

}  // namespace leakscope
