// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace leakscope {

enum class Language { Python, C, Cpp, Java, CSharp, JavaScript, PHP, Other };

inline constexpr std::array<Language, 7> kScannedLanguages = {
    Language::Python, Language::C,          Language::Cpp, Language::Java,
    Language::CSharp, Language::JavaScript, Language::PHP,
};

/// Fixed extension table. Accepts "py", ".py", "PY". Unknown → Other.
Language language_from_extension(std::string_view ext);

std::string_view to_string(Language lang);
std::optional<Language> parse_language(std::string_view name);

enum class SensitiveCategory { Email, Phone, Secret };

inline constexpr std::array<SensitiveCategory, 3> kCategories = {
    SensitiveCategory::Email, SensitiveCategory::Phone, SensitiveCategory::Secret};

inline constexpr std::size_t index_of(SensitiveCategory c) {
    return static_cast<std::size_t>(c);
}

/// Lower value wins when two candidate matches cover the same span.
inline constexpr int priority_rank(SensitiveCategory c) {
    switch (c) {
        case SensitiveCategory::Secret: return 0;
        case SensitiveCategory::Email: return 1;
        case SensitiveCategory::Phone: return 2;
    }
    return 3;
}

std::string_view to_string(SensitiveCategory c);
std::optional<SensitiveCategory> parse_category(std::string_view name);

struct CorpusRecord {
    std::string id;
    std::string text;
    std::string extension;
    Language language = Language::Other;
    std::string source_tag;
};

/// Per-category counter triple, indexed by SensitiveCategory.
template <typename T>
using PerCategory = std::array<T, 3>;

}  // namespace leakscope
