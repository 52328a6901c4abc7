// SPDX-License-Identifier: Apache-2.0
#include "leakscope/synth.hpp"

#include "leakscope/detail/shuffle.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/scanner.hpp"

#include <array>
#include <cstdio>
#include <random>
#include <set>
#include <string_view>

namespace leakscope {

namespace {

using Rng = std::mt19937_64;

constexpr std::string_view kAlnum =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
constexpr std::string_view kHex = "0123456789abcdef";

// Substrings that could start a match of some built-in pattern. Filler must
// contain none of them.
constexpr std::array<std::string_view, 17> kForbidden = {
    "@",    "AKIA",   "ghp_",     "gho_", "ghu_",    "ghs_",  "ghr_",  "github_pat_", "glpat-",
    "xox",  "hooks.", "sk_live_", "rk_live_", "AIza", "SG.", "npm_", "shpat_",
};

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& items) {
    return items[rng() % N];
}

std::string random_chars(Rng& rng, std::string_view alphabet, std::size_t n) {
    std::string s;
    s.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
}

// A digit run of 11 or more would also read as a phone number.
bool has_digit_run(std::string_view s, std::size_t limit) {
    std::size_t run = 0;
    for (char c : s) {
        run = (c >= '0' && c <= '9') ? run + 1 : 0;
        if (run >= limit) return true;
    }
    return false;
}

bool filler_is_clean(std::string_view text) {
    for (auto f : kForbidden)
        if (text.find(f) != std::string_view::npos) return false;
    return !has_digit_run(text, 11);
}

constexpr std::array<std::string_view, 12> kFirst = {
    "alice", "bruno", "chen", "dana", "emeka", "farah", "goran", "hana", "ivan", "jules", "kofi", "lena"};
constexpr std::array<std::string_view, 10> kLast = {
    "ortiz", "nguyen", "schmidt", "okafor", "rossi", "tanaka", "kowalski", "silva", "haddad", "berg"};
constexpr std::array<std::string_view, 10> kDomains = {
    "example",   "mail.example", "corp.acme",  "lab.uni-north", "dev.widgets",
    "ops.tinker", "notes",       "hq.initech", "cs.west-state", "build.orbit"};
constexpr std::array<std::string_view, 6> kTlds = {"com", "org", "net", "edu", "gov", "int"};

std::string make_email(Rng& rng, std::size_t serial) {
    std::string local = std::string(pick(rng, kFirst));
    switch (rng() % 3) {
        case 0: local += "." + std::string(pick(rng, kLast)); break;
        case 1: local += "_" + std::string(pick(rng, kLast)).substr(0, 3); break;
        default: local += "+ci"; break;
    }
    local += std::to_string(serial);
    std::string domain = std::string(pick(rng, kDomains)) + "." + std::string(pick(rng, kTlds));
    // Now and then an upper-case domain, which must fold to the same surface.
    if (rng() % 8 == 0)
        for (auto& c : domain) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return local + "@" + domain;
}

std::string make_phone(Rng& rng) { return "1" + random_chars(rng, "0123456789", 10); }

struct SecretFamily {
    std::string_view provider;
    std::string (*make)(Rng&);
};

std::string alnum_no_runs(Rng& rng, std::string_view alphabet, std::size_t n) {
    for (;;) {
        auto s = random_chars(rng, alphabet, n);
        if (!has_digit_run(s, 5)) return s;
    }
}

constexpr std::array<SecretFamily, 9> kSecretFamilies = {{
    {"aws_access_key_id", [](Rng& r) { return "AKIA" + alnum_no_runs(r, "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567", 16); }},
    {"github_pat", [](Rng& r) { return "ghp_" + alnum_no_runs(r, kAlnum, 36); }},
    {"gitlab_pat", [](Rng& r) { return "glpat-" + alnum_no_runs(r, kAlnum, 20); }},
    {"stripe_live_secret_key", [](Rng& r) { return "sk_live_" + alnum_no_runs(r, kAlnum, 24); }},
    {"google_api_key", [](Rng& r) { return "AIza" + alnum_no_runs(r, kAlnum, 35); }},
    {"npm_access_token", [](Rng& r) { return "npm_" + alnum_no_runs(r, kAlnum, 36); }},
    {"shopify_access_token", [](Rng& r) { return "shpat_" + random_chars(r, kHex, 32); }},
    {"slack_token",
     [](Rng& r) {
         return "xoxb-" + alnum_no_runs(r, kAlnum, 12) + "-" + alnum_no_runs(r, kAlnum, 12) + "-" +
                alnum_no_runs(r, kAlnum, 24);
     }},
    {"sendgrid_api_key",
     [](Rng& r) { return "SG." + alnum_no_runs(r, kAlnum, 22) + "." + alnum_no_runs(r, kAlnum, 43); }},
}};

// ---- filler ---------------------------------------------------------------

struct LangStyle {
    Language language;
    std::array<std::string_view, 2> extensions;
    std::string_view comment;
    bool camel;
};

constexpr std::array<LangStyle, 7> kStyles = {{
    {Language::Python, {"py", "py"}, "#", false},
    {Language::C, {"c", "h"}, "//", false},
    {Language::Cpp, {"cpp", "hpp"}, "//", false},
    {Language::Java, {"java", "java"}, "//", true},
    {Language::CSharp, {"cs", "cs"}, "//", true},
    {Language::JavaScript, {"js", "mjs"}, "//", true},
    {Language::PHP, {"php", "php"}, "//", false},
}};

const LangStyle& style_of(Language l) {
    for (const auto& s : kStyles)
        if (s.language == l) return s;
    return kStyles[0];
}

constexpr std::array<std::string_view, 12> kVerbs = {
    "compute", "merge", "scale", "count", "filter", "render", "parse", "update", "collect", "clamp",
    "rotate", "index"};
constexpr std::array<std::string_view, 12> kNouns = {
    "totals", "buckets", "weights", "rows", "labels", "offsets", "samples", "ranges", "items",
    "scores", "frames", "tiles"};
constexpr std::array<std::string_view, 10> kTopics = {
    "inventory helpers", "report formatting", "grid utilities", "queue bookkeeping",
    "unit conversions",  "string helpers",    "cache sizing",   "retry policy",
    "geometry helpers",  "batch statistics"};

std::string ident(const LangStyle& st, std::string_view a, std::string_view b, std::size_t n) {
    std::string out(a);
    if (st.camel) {
        out += static_cast<char>(std::toupper(static_cast<unsigned char>(b[0])));
        out += b.substr(1);
    } else {
        out += "_";
        out += b;
    }
    return out + std::to_string(n);
}

std::string pascal(std::string s) {
    bool up = true;
    std::string out;
    for (char c : s) {
        if (c == '_') {
            up = true;
            continue;
        }
        out += up ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
        up = false;
    }
    return out;
}

std::string fill(std::string_view tmpl, const std::string& fn, const std::string& cls, int a, int b) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        std::size_t j = i + 1;
        while (j < tmpl.size() && tmpl[j] >= 'a' && tmpl[j] <= 'z') ++j;
        if (tmpl[i] == '{' && j < tmpl.size() && tmpl[j] == '}') {
            const auto key = tmpl.substr(i + 1, j - i - 1);
            if (key == "fn") out += fn;
            else if (key == "cls") out += cls;
            else if (key == "a") out += std::to_string(a);
            else if (key == "b") out += std::to_string(b);
            else out += tmpl.substr(i, j - i + 1);
            i = j;
        } else {
            out += tmpl[i];
        }
    }
    return out;
}

// Placeholders are {fn}, {cls}, {a} and {b}; other braces are literal.
constexpr std::array<std::string_view, 4> kPython = {
    "def {fn}(values):\n    total = 0\n    for v in values:\n        if v > {a}:\n            total += v * {b}\n    return total\n",
    "def {fn}(name, count={a}):\n    parts = [name] * count\n    return \"-\".join(parts)\n",
    "class {cls}:\n    def __init__(self, size={a}):\n        self.size = size\n        self.items = []\n\n    def push(self, item):\n        if len(self.items) < self.size:\n            self.items.append(item)\n        return len(self.items)\n",
    "def {fn}(x, y):\n    return (x * {a} + y) % {b}\n",
};
constexpr std::array<std::string_view, 3> kC = {
    "int {fn}(const int *values, int n) {\n    int total = 0;\n    for (int i = 0; i < n; ++i) {\n        if (values[i] > {a}) total += values[i] * {b};\n    }\n    return total;\n}\n",
    "static double {fn}(double x) {\n    return x * {a}.0 / ({b} + 1);\n}\n",
    "struct {cls} {\n    int id;\n    int weight;\n    char label[{a}];\n};\n",
};
constexpr std::array<std::string_view, 3> kCpp = {
    "std::vector<int> {fn}(const std::vector<int>& in) {\n    std::vector<int> out;\n    for (int v : in)\n        if (v % {a} == 0) out.push_back(v + {b});\n    return out;\n}\n",
    "class {cls} {\npublic:\n    explicit {cls}(int cap) : cap_(cap) {}\n    bool full() const { return size_ >= cap_; }\n\nprivate:\n    int cap_ = {a};\n    int size_ = 0;\n};\n",
    "inline int {fn}(int x) { return (x << 1) ^ {a}; }\n",
};
constexpr std::array<std::string_view, 3> kJava = {
    "    static int {fn}(int[] values) {\n        int total = 0;\n        for (int v : values) {\n            if (v > {a}) total += v * {b};\n        }\n        return total;\n    }\n",
    "    public String {fn}(String name) {\n        return name.trim() + \"-\" + {a};\n    }\n",
    "    private int {fn}(int x, int y) {\n        return Math.max(x, y) % {b};\n    }\n",
};
constexpr std::array<std::string_view, 3> kCSharp = {
    "    public static int {cls}(int[] values)\n    {\n        var total = 0;\n        foreach (var v in values)\n        {\n            if (v > {a}) total += v * {b};\n        }\n        return total;\n    }\n",
    "    public string {cls}(string name) => name.Trim() + \"_\" + {a};\n",
    "    private static double {cls}(double x)\n    {\n        return x / {b}.0;\n    }\n",
};
constexpr std::array<std::string_view, 3> kJs = {
    "function {fn}(values) {\n  let total = 0;\n  for (const v of values) {\n    if (v > {a}) total += v * {b};\n  }\n  return total;\n}\n",
    "const {fn} = (name) => `${name}-{a}`;\n",
    "export class {cls} {\n  constructor(limit = {a}) {\n    this.limit = limit;\n    this.items = [];\n  }\n}\n",
};
constexpr std::array<std::string_view, 2> kPhp = {
    "function {fn}(array $values): int\n{\n    $total = 0;\n    foreach ($values as $v) {\n        if ($v > {a}) {\n            $total += $v * {b};\n        }\n    }\n    return $total;\n}\n",
    "function {fn}(string $name): string\n{\n    return trim($name) . '-' . {a};\n}\n",
};

template <std::size_t N>
std::string_view pick_template(Rng& rng, const std::array<std::string_view, N>& t) {
    return t[rng() % N];
}

std::string block(Rng& rng, const LangStyle& st, const std::string& tag, std::size_t n) {
    const auto verb = pick(rng, kVerbs);
    const auto noun = pick(rng, kNouns);
    const std::string fn = ident(st, verb, noun, n);
    const std::string cls = pascal(std::string(noun) + "_" + tag + "_" + std::to_string(n));
    const int a = static_cast<int>(1 + rng() % 97);
    const int b = static_cast<int>(2 + rng() % 13);
    std::string_view t;
    switch (st.language) {
        case Language::Python: t = pick_template(rng, kPython); break;
        case Language::C: t = pick_template(rng, kC); break;
        case Language::Cpp: t = pick_template(rng, kCpp); break;
        case Language::Java: t = pick_template(rng, kJava); break;
        case Language::CSharp: t = pick_template(rng, kCSharp); break;
        case Language::JavaScript: t = pick_template(rng, kJs); break;
        default: t = pick_template(rng, kPhp); break;
    }
    return fill(t, fn, cls, a, b);
}

std::string prologue(Rng& rng, Language l) {
    switch (l) {
        case Language::Python: return rng() % 2 ? "import math\nimport os\n" : "from typing import List\n";
        case Language::C: return rng() % 2 ? "#include <stdio.h>\n#include <string.h>\n" : "#include <stdlib.h>\n";
        case Language::Cpp: return "#include <string>\n#include <vector>\n";
        case Language::Java: return "package org.sample.util;\n\nimport java.util.List;\n";
        case Language::CSharp: return "using System;\nusing System.Linq;\n";
        case Language::JavaScript: return rng() % 2 ? "'use strict';\n" : "import path from 'path';\n";
        default: return "<?php\ndeclare(strict_types=1);\n";
    }
}

constexpr std::array<std::string_view, 3> kEmailRoles = {"support_contact", "maintainer_email", "notify_address"};
constexpr std::array<std::string_view, 3> kPhoneRoles = {"support_phone", "fallback_number", "sms_sender"};
constexpr std::array<std::string_view, 3> kSecretRoles = {"api_key", "access_token", "deploy_secret"};

// Returns {line prefix, line suffix}; the surface goes in between.
std::pair<std::string, std::string> planted_line(Rng& rng, const LangStyle& st, SensitiveCategory cat,
                                                 const std::string& tag) {
    const auto role = cat == SensitiveCategory::Email   ? pick(rng, kEmailRoles)
                      : cat == SensitiveCategory::Phone ? pick(rng, kPhoneRoles)
                                                        : pick(rng, kSecretRoles);
    // Comment form for PII, to vary context.
    if (cat != SensitiveCategory::Secret && rng() % 4 == 0) {
        const std::string lead = cat == SensitiveCategory::Email ? " contact for " : " call ";
        return {std::string(st.comment) + lead + tag + ": ", "\n"};
    }
    std::string name = std::string(role) + "_" + tag;
    switch (st.language) {
        case Language::Python: return {name + " = \"", "\"\n"};
        case Language::C: return {"static const char *" + name + " = \"", "\";\n"};
        case Language::Cpp: return {"constexpr const char* " + name + " = \"", "\";\n"};
        case Language::Java: {
            for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return {"    private static final String " + name + " = \"", "\";\n"};
        }
        case Language::CSharp: return {"    private const string " + pascal(name) + " = \"", "\";\n"};
        case Language::JavaScript: return {"const " + name + " = '", "';\n"};
        default: return {"$" + name + " = '", "';\n"};
    }
}

struct Plant {
    SensitiveCategory category;
    std::string provider;
    std::string surface;
};

CorpusRecord make_record(Rng& rng, std::size_t index, Language lang, const Plant* plant,
                         std::size_t min_offset, PlantedItem* planted) {
    const auto& st = style_of(lang);
    char tagbuf[32];
    std::snprintf(tagbuf, sizeof tagbuf, "r%06zu", index);
    const std::string tag = tagbuf;

    CorpusRecord rec;
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "synth-%06zu", index);
    rec.id = idbuf;
    rec.language = lang;
    rec.extension = std::string(st.extensions[rng() % 2]);
    rec.source_tag = "synth/" + std::string(to_string(lang));

    const bool wrapped = lang == Language::Java || lang == Language::CSharp;
    std::string head = std::string(st.comment) + " " + tag + ": " + std::string(pick(rng, kTopics)) + "\n";
    head += prologue(rng, lang) + "\n";
    if (wrapped) head += "public class " + pascal("module_" + tag) + (lang == Language::Java ? " {\n" : "\n{\n");

    const std::size_t nblocks = 1 + rng() % 4;
    std::vector<std::string> blocks;
    for (std::size_t b = 0; b < nblocks; ++b) blocks.push_back(block(rng, st, tag, b));
    const std::string tail = wrapped ? "}\n" : "";

    std::string filler_check = head + tail;
    for (const auto& b : blocks) filler_check += b;
    if (!filler_is_clean(filler_check))
        throw DomainError("generated filler for " + rec.id + " would match a pattern");

    std::size_t insert_after = plant ? rng() % (nblocks + 1) : nblocks;
    std::string text = head;
    for (std::size_t b = 0; b <= nblocks; ++b) {
        if (plant && b == insert_after) {
            if (text.size() < min_offset) {
                ++insert_after;  // too close to the start; try after the next block
            } else {
                auto [pre, post] = planted_line(rng, st, plant->category, tag);
                text += pre;
                planted->offset = text.size();
                text += plant->surface;
                text += post + "\n";
            }
        }
        if (b < nblocks) text += blocks[b] + "\n";
    }
    if (plant && planted->offset == 0) {
        // Every block was too short to clear the offset; plant at the end.
        auto [pre, post] = planted_line(rng, st, plant->category, tag);
        text += pre;
        planted->offset = text.size();
        text += plant->surface + post;
    }
    text += tail;
    // Files end differently; without this the repeated filler would give
    // many records the same closing bytes.
    text += std::string(st.comment) + " end of " + tag + "\n";
    if (plant) {
        planted->record_id = rec.id;
        planted->language = lang;
        planted->category = plant->category;
        planted->provider = plant->provider;
        planted->surface = plant->surface;
    }
    rec.text = std::move(text);
    return rec;
}

CorpusRecord make_other_record(Rng& rng, std::size_t index, std::vector<PlantedItem>& decoys,
                               std::set<std::string>& used) {
    constexpr std::array<std::string_view, 4> kExts = {"md", "txt", "rst", "yml"};
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "synth-%06zu", index);
    CorpusRecord rec;
    rec.id = idbuf;
    rec.extension = std::string(pick(rng, kExts));
    rec.language = Language::Other;
    rec.source_tag = "synth/other";
    std::string email;
    do email = make_email(rng, 900000 + index);
    while (!used.insert(normalize_surface(SensitiveCategory::Email, email)).second);
    std::string text = "Notes for r" + std::to_string(index) + "\n\nThis folder holds " +
                       std::string(pick(rng, kTopics)) + ".\nMaintained by ";
    PlantedItem d{rec.id, Language::Other, SensitiveCategory::Email, "decoy", email, text.size()};
    text += email + " on weekdays.\n";
    decoys.push_back(d);
    rec.text = std::move(text);
    return rec;
}

}  // namespace

Json PlantedItem::to_json() const {
    return Json{{"record_id", record_id},
                {"language", std::string(to_string(language))},
                {"category", std::string(to_string(category))},
                {"provider", provider},
                {"surface", surface},
                {"offset", offset}};
}

PlantedItem PlantedItem::from_json(const Json& j) {
    PlantedItem p;
    p.record_id = j.at("record_id").get<std::string>();
    const auto lang = parse_language(j.at("language").get<std::string>());
    const auto cat = parse_category(j.at("category").get<std::string>());
    if (!lang || !cat) throw SchemaMismatch("bad planted item");
    p.language = *lang;
    p.category = *cat;
    p.provider = j.at("provider").get<std::string>();
    p.surface = j.at("surface").get<std::string>();
    p.offset = j.at("offset").get<std::size_t>();
    return p;
}

PerCategory<std::uint64_t> SynthCorpus::planted_totals() const {
    PerCategory<std::uint64_t> t{};
    for (const auto& p : planted) ++t[index_of(p.category)];
    return t;
}

Json SynthCorpus::expected_json() const {
    auto counts = [](const PerCategory<std::uint64_t>& c) {
        Json j = Json::object();
        for (auto cat : kCategories) j[std::string(to_string(cat))] = c[index_of(cat)];
        return j;
    };
    Json per = Json::object();
    for (const auto& [lang, e] : expected)
        per[std::string(to_string(lang))] = {{"record_count", e.record_count}, {"planted", counts(e.planted)}};
    return Json{{"kind", "synth_expected"},
                {"records", records.size()},
                {"planted", counts(planted_totals())},
                {"decoys_in_unscanned_records", decoys.size()},
                {"per_language", std::move(per)}};
}

SynthCorpus generate_corpus(const SynthConfig& config) {
    const std::size_t plants = config.emails + config.phones + config.secrets;
    if (config.other_language_records > config.records ||
        plants > config.records - config.other_language_records)
        throw DomainError("not enough scannable records for the requested plants");

    Rng rng(config.seed);
    std::vector<Language> langs;
    langs.reserve(config.records);
    for (std::size_t i = 0; i < config.other_language_records; ++i) langs.push_back(Language::Other);
    for (std::size_t i = langs.size(); i < config.records; ++i)
        langs.push_back(kScannedLanguages[rng() % kScannedLanguages.size()]);
    seeded_shuffle(langs, config.seed ^ 0x5bd1e995ULL);

    std::vector<std::size_t> scannable;
    for (std::size_t i = 0; i < langs.size(); ++i)
        if (langs[i] != Language::Other) scannable.push_back(i);
    seeded_shuffle(scannable, config.seed * 31 + 7);

    std::set<std::string> used;
    std::vector<Plant> plant_list;
    for (std::size_t i = 0; i < config.emails; ++i) {
        std::string s;
        do s = make_email(rng, i);
        while (!used.insert(normalize_surface(SensitiveCategory::Email, s)).second);
        plant_list.push_back({SensitiveCategory::Email, "email", s});
    }
    for (std::size_t i = 0; i < config.phones; ++i) {
        std::string s;
        do s = make_phone(rng);
        while (!used.insert(s).second);
        plant_list.push_back({SensitiveCategory::Phone, "phone_us11", s});
    }
    for (std::size_t i = 0; i < config.secrets; ++i) {
        const auto& fam = kSecretFamilies[i % kSecretFamilies.size()];
        std::string s;
        do s = fam.make(rng);
        while (!used.insert(s).second);
        plant_list.push_back({SensitiveCategory::Secret, std::string(fam.provider), s});
    }

    std::vector<const Plant*> plant_at(config.records, nullptr);
    for (std::size_t i = 0; i < plant_list.size(); ++i) plant_at[scannable[i]] = &plant_list[i];

    SynthCorpus out;
    out.records.reserve(config.records);
    for (std::size_t i = 0; i < config.records; ++i) {
        if (langs[i] == Language::Other) {
            out.records.push_back(make_other_record(rng, i, out.decoys, used));
            continue;
        }
        PlantedItem item;
        out.records.push_back(make_record(rng, i, langs[i], plant_at[i], config.min_offset, &item));
        auto& e = out.expected[langs[i]];
        ++e.record_count;
        if (plant_at[i]) {
            ++e.planted[index_of(item.category)];
            out.planted.push_back(std::move(item));
        }
    }
    for (auto l : kScannedLanguages) out.expected.try_emplace(l);
    return out;
}

SynthPaths write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir, std::size_t shards) {
    if (shards == 0) throw DomainError("shard count must be >= 1");
    SynthPaths paths;
    std::filesystem::create_directories(dir / "shards");
    const std::size_t per = (corpus.records.size() + shards - 1) / shards;
    for (std::size_t s = 0; s < shards; ++s) {
        char name[48];
        std::snprintf(name, sizeof name, "shard-%02zu.jsonl.gz", s);
        const auto path = dir / "shards" / name;
        GzLineWriter w(path);
        for (std::size_t i = s * per; i < std::min(corpus.records.size(), (s + 1) * per); ++i)
            w.write_line(corpus_line(corpus.records[i]));
        w.close();
        paths.shards.push_back(path);
    }
    paths.expected = dir / "expected.json";
    write_text_file(paths.expected, corpus.expected_json().dump(2) + "\n");

    prepare_sensitive_dir(dir / "sensitive");
    paths.planted = dir / "sensitive" / "planted.jsonl.gz";
    GzLineWriter w(paths.planted, FileMode::Restricted);
    w.write_line("# SENSITIVE: planted ground truth for a synthetic corpus.");
    for (const auto& p : corpus.planted) w.write_json(p.to_json());
    w.close();
    return paths;
}

}  // namespace leakscope
