// SPDX-License-Identifier: Apache-2.0
#include "leakscope/oracle_lm.hpp"

#include "leakscope/errors.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace leakscope {

namespace {

constexpr std::uint64_t kBase = 0x100000001b3ULL;

std::uint64_t power(std::uint64_t base, std::size_t exp) {
    std::uint64_t r = 1;
    while (exp--) r *= base;
    return r;
}

// Rolling form of window_hash over one record. Appends one entry per split
// point p in [W, len).
void hash_record(std::string_view text, std::uint32_t record, std::size_t window,
                 std::uint64_t top_power, std::vector<Oracle::Entry>& out) {
    if (text.size() <= window) return;
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < window; ++i) h = h * kBase + static_cast<unsigned char>(text[i]);
    for (std::size_t p = window;; ++p) {
        out.push_back({h, record, static_cast<std::uint32_t>(p)});
        if (p + 1 >= text.size()) break;
        h -= top_power * static_cast<unsigned char>(text[p - window]);
        h = h * kBase + static_cast<unsigned char>(text[p]);
    }
}

void validate(std::span<const CorpusRecord> records, std::size_t window) {
    if (window < 4) throw DomainError("oracle window must be >= 4");
    if (records.empty()) throw DomainError("oracle needs at least one record");
    if (records.size() > std::numeric_limits<std::uint32_t>::max())
        throw DomainError("too many records for the oracle index");
    for (const auto& r : records)
        if (r.text.size() > std::numeric_limits<std::uint32_t>::max())
            throw DomainError("record " + r.id + " too large for the oracle index");
}

bool entry_less(const Oracle::Entry& a, const Oracle::Entry& b) {
    return std::tie(a.hash, a.record, a.position) < std::tie(b.hash, b.record, b.position);
}

std::size_t utf8_floor(std::string_view s, std::size_t n) {
    if (n >= s.size()) return s.size();
    while (n > 0 && (static_cast<unsigned char>(s[n]) & 0xC0) == 0x80) --n;
    return n;
}

}  // namespace

std::uint64_t window_hash(std::string_view window) {
    std::uint64_t h = 0;
    for (unsigned char c : window) h = h * kBase + c;
    return h;
}

template <typename F>
void Oracle::for_each_match(std::string_view window, F&& f) const {
    if (window.size() != window_) return;
    const std::uint64_t h = window_hash(window);
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), h,
                               [](const Entry& e, std::uint64_t v) { return e.hash < v; });
    for (; lo != entries_.end() && lo->hash == h; ++lo) {
        const std::string& text = texts_[lo->record];
        if (std::string_view(text).substr(lo->position - window_, window_) != window) continue;
        f(std::string_view(text).substr(lo->position));
    }
}

bool Oracle::lookup(std::string_view window, std::string_view& continuation) const {
    bool found = false;
    for_each_match(window, [&](std::string_view cont) {
        if (!found || cont < continuation) continuation = cont;
        found = true;
    });
    return found;
}

std::size_t Oracle::occurrences(std::string_view window) const {
    std::size_t n = 0;
    for_each_match(window, [&](std::string_view) { ++n; });
    return n;
}

Oracle build_oracle_serial(std::span<const CorpusRecord> records, std::size_t window) {
    validate(records, window);
    Oracle o;
    o.window_ = window;
    const std::uint64_t top = power(kBase, window - 1);
    o.texts_.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        o.texts_.push_back(records[r].text);
        hash_record(o.texts_.back(), static_cast<std::uint32_t>(r), window, top, o.entries_);
    }
    std::sort(o.entries_.begin(), o.entries_.end(), entry_less);
    return o;
}

Oracle build_oracle_parallel(std::span<const CorpusRecord> records, std::size_t window) {
    validate(records, window);
    Oracle o;
    o.window_ = window;
    const std::uint64_t top = power(kBase, window - 1);
    o.texts_.reserve(records.size());
    for (const auto& r : records) o.texts_.push_back(r.text);

    // Exclusive prefix sum of per-record entry counts gives each record a
    // private slice of the output, so the hashing loop needs no locking.
    std::vector<std::size_t> offsets(records.size() + 1, 0);
    for (std::size_t r = 0; r < records.size(); ++r) {
        const std::size_t len = o.texts_[r].size();
        offsets[r + 1] = offsets[r] + (len > window ? len - window : 0);
    }
    o.entries_.resize(offsets.back());

    const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel
    {
        std::vector<Oracle::Entry> local;
#pragma omp for schedule(dynamic, 64)
        for (std::ptrdiff_t r = 0; r < n; ++r) {
            local.clear();
            hash_record(o.texts_[r], static_cast<std::uint32_t>(r), window, top, local);
            std::copy(local.begin(), local.end(), o.entries_.begin() + offsets[r]);
        }
    }
    std::sort(o.entries_.begin(), o.entries_.end(), entry_less);
    return o;
}

std::string oracle_complete(const Oracle& oracle, std::string_view prompt,
                            std::size_t max_new_tokens) {
    const std::size_t w = oracle.window();
    if (prompt.size() < w) return oracle.default_output();
    std::string_view cont;
    if (!oracle.lookup(prompt.substr(prompt.size() - w), cont)) return oracle.default_output();
    return std::string(cont.substr(0, utf8_floor(cont, max_new_tokens)));
}

}  // namespace leakscope
