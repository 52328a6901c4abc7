// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace leakscope {

/// Strict UTF-8 check: rejects overlongs, surrogates and code points > U+10FFFF.
bool is_valid_utf8(std::string_view bytes);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// FNV-1a, used where a stable, cheap 64-bit fingerprint is enough.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string ascii_lower(std::string_view s);

/// UTC ISO-8601 timestamp with second resolution.
std::string utc_timestamp();

/// Round to one decimal place, the precision reports use for percentages.
double round1(double v);

}  // namespace leakscope
