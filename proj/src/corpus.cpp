// SPDX-License-Identifier: Apache-2.0
#include "leakscope/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace leakscope {

Language language_from_extension(std::string_view ext) {
    if (!ext.empty() && ext.front() == '.') ext.remove_prefix(1);
    std::string e(ext);
    std::transform(e.begin(), e.end(), e.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    if (e == "py" || e == "pyw" || e == "pyi") return Language::Python;
    if (e == "c" || e == "h") return Language::C;
    if (e == "cpp" || e == "cc" || e == "cxx" || e == "c++" || e == "hpp" || e == "hh" ||
        e == "hxx" || e == "h++")
        return Language::Cpp;
    if (e == "java") return Language::Java;
    if (e == "cs") return Language::CSharp;
    if (e == "js" || e == "mjs" || e == "cjs" || e == "jsx") return Language::JavaScript;
    if (e == "php") return Language::PHP;
    return Language::Other;
}

std::string_view to_string(Language lang) {
    switch (lang) {
        case Language::Python: return "Python";
        case Language::C: return "C";
        case Language::Cpp: return "C++";
        case Language::Java: return "Java";
        case Language::CSharp: return "C#";
        case Language::JavaScript: return "JavaScript";
        case Language::PHP: return "PHP";
        case Language::Other: return "Other";
    }
    return "Other";
}

std::optional<Language> parse_language(std::string_view name) {
    for (Language l : kScannedLanguages)
        if (to_string(l) == name) return l;
    if (name == "Other") return Language::Other;
    return std::nullopt;
}

std::string_view to_string(SensitiveCategory c) {
    switch (c) {
        case SensitiveCategory::Email: return "email";
        case SensitiveCategory::Phone: return "phone";
        case SensitiveCategory::Secret: return "secret";
    }
    return "unknown";
}

std::optional<SensitiveCategory> parse_category(std::string_view name) {
    for (SensitiveCategory c : kCategories)
        if (to_string(c) == name) return c;
    return std::nullopt;
}

}  // namespace leakscope
