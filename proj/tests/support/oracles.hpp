// SPDX-License-Identifier: Apache-2.0
// Reference computations that share no code with the library.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace leakscope::testing {

/// pass@k by enumerating every k-subset of n attempts, c of them successes.
inline double brute_force_pass_at_k(int n, int c, int k) {
    std::uint64_t hits = 0, total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        ++total;
        // Attempts 0..c-1 are the successes.
        if (mask & ((1u << c) - 1)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

/// Percent change, unrounded.
inline double percent_change(double a, double b) { return (b - a) / a * 100.0; }

/// Every occurrence count of `needle` in `hay`, overlapping allowed.
inline std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace leakscope::testing
