// SPDX-License-Identifier: Apache-2.0
#include "leakscope/release_diff.hpp"

#include "leakscope/errors.hpp"
#include "leakscope/util.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace leakscope {

namespace {

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> opt_double(const Json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

std::optional<std::size_t> opt_size(const Json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<std::size_t>();
}

Json count_json(const CountDelta& d) {
    return Json{{"a", d.a},
                {"b", d.b},
                {"abs_diff", d.abs_diff},
                {"rel_change", opt_json(d.rel_change)},
                {"rel_change_pct", opt_json(d.rel_change_pct)}};
}

CountDelta count_from_json(const Json& j) {
    CountDelta d;
    d.a = j.at("a").get<std::uint64_t>();
    d.b = j.at("b").get<std::uint64_t>();
    d.abs_diff = j.at("abs_diff").get<std::int64_t>();
    d.rel_change = opt_double(j, "rel_change");
    d.rel_change_pct = opt_double(j, "rel_change_pct");
    return d;
}

void check_kind(const Json& j, std::string_view kind, int version) {
    if (!j.is_object() || !j.contains("kind") || j.at("kind") != kind)
        throw SchemaMismatch("expected a " + std::string(kind) + " document");
    if (!j.contains("schema_version") || j.at("schema_version") != version)
        throw SchemaMismatch("unsupported " + std::string(kind) + " schema version");
}

std::string fmt_pct(const std::optional<double>& pct) {
    if (!pct) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.1f%%", *pct);
    return buf;
}

std::string fmt_rate(const std::optional<double>& rate) {
    if (!rate) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", *rate * 100.0);
    return buf;
}

std::string fmt_points(const std::optional<double>& change) {
    if (!change) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.2f pp", *change * 100.0);
    return buf;
}

std::string fmt_signed(std::int64_t v) {
    return (v > 0 ? "+" : "") + std::to_string(v);
}

// A grouping section shows cells where exactly the named dimensions are set.
struct Grouping {
    const char* title;
    bool category, strategy, dataset, language;
};

constexpr Grouping kGroupings[] = {
    {"Overall", false, false, false, false},
    {"By category", true, false, false, false},
    {"By strategy", false, true, false, false},
    {"By dataset", false, false, true, false},
    {"By language", false, false, false, true},
    {"By category and strategy", true, true, false, false},
    {"By category and dataset", true, false, true, false},
};

bool in_grouping(const CellKey& key, const Grouping& g) {
    return (key.category != kAll) == g.category && (key.strategy != kAll) == g.strategy &&
           (key.dataset != kAll) == g.dataset && (key.language != kAll) == g.language;
}

std::string dims_label(const CellKey& key, const Grouping& g) {
    std::string out;
    auto add = [&](bool on, const std::string& v) {
        if (!on) return;
        if (!out.empty()) out += " / ";
        out += v;
    };
    add(g.category, key.category);
    add(g.strategy, key.strategy);
    add(g.dataset, key.dataset);
    add(g.language, key.language);
    return out.empty() ? "all" : out;
}

constexpr RiskType kRiskTypes[] = {RiskType::Malicious, RiskType::Unintentional};

}  // namespace

CountDelta CountDelta::of(std::uint64_t a, std::uint64_t b) {
    CountDelta d;
    d.a = a;
    d.b = b;
    d.abs_diff = static_cast<std::int64_t>(b) - static_cast<std::int64_t>(a);
    if (a > 0) {
        d.rel_change = static_cast<double>(d.abs_diff) / static_cast<double>(a);
        d.rel_change_pct = round1(*d.rel_change * 100.0);
    }
    return d;
}

const ScanDeltaRow* ScanDelta::find(std::string_view language, SensitiveCategory category) const {
    for (const auto& r : rows)
        if (r.language == language && r.category == category) return &r;
    return nullptr;
}

ScanDelta diff_scans(const ScanSummary& a, const ScanSummary& b) {
    ScanDelta d;
    d.label_a = a.release_label;
    d.label_b = b.release_label;
    d.pattern_version_a = a.pattern_table_version;
    d.pattern_version_b = b.pattern_table_version;
    if (a.pattern_table_version != b.pattern_table_version)
        d.warnings.push_back("pattern table versions differ (" + a.pattern_table_version + " vs " +
                             b.pattern_table_version + "); counts may not be comparable");

    d.corpus_size = CountDelta::of(a.totals.record_count, b.totals.record_count);
    auto stats = [](const ScanSummary& s, Language l) {
        auto it = s.per_language.find(l);
        return it == s.per_language.end() ? LanguageStats{} : it->second;
    };
    auto add_rows = [&](const std::string& name, const LanguageStats& sa, const LanguageStats& sb) {
        for (auto c : kCategories) {
            const auto i = index_of(c);
            d.rows.push_back({name, c, CountDelta::of(sa.records_with_match[i], sb.records_with_match[i]),
                              CountDelta::of(sa.unique_match_total[i], sb.unique_match_total[i])});
        }
    };
    for (auto lang : kScannedLanguages) {
        const auto sa = stats(a, lang);
        const auto sb = stats(b, lang);
        d.records_per_language.emplace_back(std::string(to_string(lang)),
                                            CountDelta::of(sa.record_count, sb.record_count));
        add_rows(std::string(to_string(lang)), sa, sb);
    }
    add_rows(std::string(kAll), a.totals, b.totals);
    for (auto c : kCategories) {
        const auto i = index_of(c);
        d.corpus_distinct[i] = CountDelta::of(a.corpus_distinct[i], b.corpus_distinct[i]);
    }
    return d;
}

Json ScanDelta::to_json() const {
    Json per_lang = Json::array();
    for (const auto& [lang, cd] : records_per_language)
        per_lang.push_back({{"language", lang}, {"record_count", count_json(cd)}});
    Json rj = Json::array();
    for (const auto& r : rows)
        rj.push_back({{"language", r.language},
                      {"category", std::string(to_string(r.category))},
                      {"records_with_match", count_json(r.records_with_match)},
                      {"unique_match_total", count_json(r.unique_match_total)}});
    Json distinct = Json::object();
    for (auto c : kCategories)
        distinct[std::string(to_string(c))] = count_json(corpus_distinct[index_of(c)]);
    return Json{{"schema_version", kSchemaVersion},
                {"kind", "scan_delta"},
                {"label_a", label_a},
                {"label_b", label_b},
                {"pattern_version_a", pattern_version_a},
                {"pattern_version_b", pattern_version_b},
                {"warnings", warnings},
                {"corpus_size", count_json(corpus_size)},
                {"records_per_language", std::move(per_lang)},
                {"rows", std::move(rj)},
                {"corpus_distinct", std::move(distinct)}};
}

ScanDelta ScanDelta::from_json(const Json& j) {
    check_kind(j, "scan_delta", kSchemaVersion);
    try {
        ScanDelta d;
        d.label_a = j.at("label_a").get<std::string>();
        d.label_b = j.at("label_b").get<std::string>();
        d.pattern_version_a = j.at("pattern_version_a").get<std::string>();
        d.pattern_version_b = j.at("pattern_version_b").get<std::string>();
        d.warnings = j.at("warnings").get<std::vector<std::string>>();
        d.corpus_size = count_from_json(j.at("corpus_size"));
        for (const auto& e : j.at("records_per_language"))
            d.records_per_language.emplace_back(e.at("language").get<std::string>(),
                                                count_from_json(e.at("record_count")));
        for (const auto& r : j.at("rows")) {
            const auto cat = parse_category(r.at("category").get<std::string>());
            if (!cat) throw SchemaMismatch("bad category in scan delta");
            d.rows.push_back({r.at("language").get<std::string>(), *cat,
                              count_from_json(r.at("records_with_match")),
                              count_from_json(r.at("unique_match_total"))});
        }
        for (auto c : kCategories)
            d.corpus_distinct[index_of(c)] =
                count_from_json(j.at("corpus_distinct").at(std::string(to_string(c))));
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(std::string("malformed scan delta: ") + e.what());
    }
}

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::Increased: return "increased";
        case Direction::Decreased: return "decreased";
        case Direction::Unchanged: return "unchanged";
        case Direction::Undefined: break;
    }
    return "undefined";
}

std::string_view to_string(Presence p) {
    switch (p) {
        case Presence::Both: return "both";
        case Presence::OnlyA: return "only_a";
        case Presence::OnlyB: break;
    }
    return "only_b";
}

namespace {

Direction parse_direction(const std::string& s) {
    for (auto d : {Direction::Increased, Direction::Decreased, Direction::Unchanged, Direction::Undefined})
        if (to_string(d) == s) return d;
    throw SchemaMismatch("bad direction '" + s + "'");
}

Presence parse_presence(const std::string& s) {
    for (auto p : {Presence::Both, Presence::OnlyA, Presence::OnlyB})
        if (to_string(p) == s) return p;
    throw SchemaMismatch("bad presence '" + s + "'");
}

std::optional<double> rate_at(const Cell* c, int k) {
    if (!c) return std::nullopt;
    auto it = c->by_k.find(k);
    if (it == c->by_k.end()) return std::nullopt;
    return it->second.rate;
}

}  // namespace

const RateDelta* CellDelta::at_k(int k) const {
    for (const auto& r : by_k)
        if (r.k == k) return &r;
    return nullptr;
}

const CellDelta* DisclosureDelta::find(const CellKey& key) const {
    auto it = std::lower_bound(cells.begin(), cells.end(), key,
                               [](const CellDelta& c, const CellKey& k) { return c.key < k; });
    return it != cells.end() && it->key == key ? &*it : nullptr;
}

DisclosureDelta diff_reports(const DisclosureReport& a, const DisclosureReport& b) {
    DisclosureDelta d;
    d.label_a = a.run_label;
    d.label_b = b.run_label;
    d.config_hash_a = a.config_hash;
    d.config_hash_b = b.config_hash;
    std::set<int> ks(a.k_values.begin(), a.k_values.end());
    ks.insert(b.k_values.begin(), b.k_values.end());
    d.k_values.assign(ks.begin(), ks.end());
    if (a.k_values != b.k_values)
        d.warnings.push_back("reports were scored with different k sets");

    std::set<CellKey> keys;
    for (const auto& c : a.cells) keys.insert(c.key);
    for (const auto& c : b.cells) keys.insert(c.key);

    for (const auto& key : keys) {
        const Cell* ca = a.find(key);
        const Cell* cb = b.find(key);
        CellDelta cd;
        cd.key = key;
        cd.presence = ca && cb ? Presence::Both : ca ? Presence::OnlyA : Presence::OnlyB;
        if (ca) cd.n_cases_a = ca->n_cases;
        if (cb) cd.n_cases_b = cb->n_cases;
        for (int k : d.k_values) {
            RateDelta r;
            r.k = k;
            r.rate_a = rate_at(ca, k);
            r.rate_b = rate_at(cb, k);
            if (r.rate_a && r.rate_b) {
                r.abs_change = *r.rate_b - *r.rate_a;
                r.direction = *r.abs_change > 0   ? Direction::Increased
                              : *r.abs_change < 0 ? Direction::Decreased
                                                  : Direction::Unchanged;
                if (*r.rate_a > 0) {
                    r.rel_change = *r.abs_change / *r.rate_a;
                    r.rel_change_pct = round1(*r.rel_change * 100.0);
                }
            }
            cd.by_k.push_back(r);
        }
        d.cells.push_back(std::move(cd));
    }
    return d;
}

Json DisclosureDelta::to_json() const {
    Json cj = Json::array();
    for (const auto& c : cells) {
        Json ks = Json::array();
        for (const auto& r : c.by_k)
            ks.push_back({{"k", r.k},
                          {"rate_a", opt_json(r.rate_a)},
                          {"rate_b", opt_json(r.rate_b)},
                          {"abs_change", opt_json(r.abs_change)},
                          {"rel_change", opt_json(r.rel_change)},
                          {"rel_change_pct", opt_json(r.rel_change_pct)},
                          {"direction", std::string(to_string(r.direction))}});
        cj.push_back({{"risk_type", std::string(to_string(c.key.risk_type))},
                      {"category", c.key.category},
                      {"strategy", c.key.strategy},
                      {"dataset", c.key.dataset},
                      {"language", c.key.language},
                      {"presence", std::string(to_string(c.presence))},
                      {"n_cases_a", c.n_cases_a ? Json(*c.n_cases_a) : Json(nullptr)},
                      {"n_cases_b", c.n_cases_b ? Json(*c.n_cases_b) : Json(nullptr)},
                      {"by_k", std::move(ks)}});
    }
    return Json{{"schema_version", kSchemaVersion},
                {"kind", "disclosure_delta"},
                {"label_a", label_a},
                {"label_b", label_b},
                {"config_hash_a", config_hash_a},
                {"config_hash_b", config_hash_b},
                {"k", k_values},
                {"warnings", warnings},
                {"cells", std::move(cj)}};
}

DisclosureDelta DisclosureDelta::from_json(const Json& j) {
    check_kind(j, "disclosure_delta", kSchemaVersion);
    try {
        DisclosureDelta d;
        d.label_a = j.at("label_a").get<std::string>();
        d.label_b = j.at("label_b").get<std::string>();
        d.config_hash_a = j.at("config_hash_a").get<std::string>();
        d.config_hash_b = j.at("config_hash_b").get<std::string>();
        d.k_values = j.at("k").get<std::vector<int>>();
        d.warnings = j.at("warnings").get<std::vector<std::string>>();
        for (const auto& c : j.at("cells")) {
            CellDelta cd;
            const auto rt = parse_risk_type(c.at("risk_type").get<std::string>());
            if (!rt) throw SchemaMismatch("bad risk_type in disclosure delta");
            cd.key.risk_type = *rt;
            cd.key.category = c.at("category").get<std::string>();
            cd.key.strategy = c.at("strategy").get<std::string>();
            cd.key.dataset = c.at("dataset").get<std::string>();
            cd.key.language = c.at("language").get<std::string>();
            cd.presence = parse_presence(c.at("presence").get<std::string>());
            cd.n_cases_a = opt_size(c, "n_cases_a");
            cd.n_cases_b = opt_size(c, "n_cases_b");
            for (const auto& r : c.at("by_k")) {
                RateDelta rd;
                rd.k = r.at("k").get<int>();
                rd.rate_a = opt_double(r, "rate_a");
                rd.rate_b = opt_double(r, "rate_b");
                rd.abs_change = opt_double(r, "abs_change");
                rd.rel_change = opt_double(r, "rel_change");
                rd.rel_change_pct = opt_double(r, "rel_change_pct");
                rd.direction = parse_direction(r.at("direction").get<std::string>());
                cd.by_k.push_back(rd);
            }
            d.cells.push_back(std::move(cd));
        }
        std::sort(d.cells.begin(), d.cells.end(),
                  [](const CellDelta& x, const CellDelta& y) { return x.key < y.key; });
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(std::string("malformed disclosure delta: ") + e.what());
    }
}

std::optional<RenderFormat> parse_render_format(std::string_view s) {
    if (s == "json") return RenderFormat::Json;
    if (s == "markdown" || s == "md") return RenderFormat::Markdown;
    return std::nullopt;
}

std::string render(const ScanDelta& delta, RenderFormat format) {
    if (format == RenderFormat::Json) return delta.to_json().dump(2) + "\n";
    std::ostringstream out;
    out << "# Scan diff: " << delta.label_a << " -> " << delta.label_b << "\n\n";
    for (const auto& w : delta.warnings) out << "> Warning: " << w << "\n";
    if (!delta.warnings.empty()) out << "\n";
    out << "Pattern tables: `" << delta.pattern_version_a << "` / `" << delta.pattern_version_b
        << "`\n\n";
    out << "Corpus size: " << delta.corpus_size.a << " -> " << delta.corpus_size.b << " ("
        << fmt_signed(delta.corpus_size.abs_diff) << ", " << fmt_pct(delta.corpus_size.rel_change_pct)
        << ")\n\n";
    out << "| language | category | unique a | unique b | diff | change | files a | files b | "
           "files change |\n";
    out << "|---|---|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& r : delta.rows) {
        const auto& u = r.unique_match_total;
        const auto& f = r.records_with_match;
        out << "| " << (r.language == kAll ? "all" : r.language) << " | " << to_string(r.category)
            << " | " << u.a << " | " << u.b << " | " << fmt_signed(u.abs_diff) << " | "
            << fmt_pct(u.rel_change_pct) << " | " << f.a << " | " << f.b << " | "
            << fmt_pct(f.rel_change_pct) << " |\n";
    }
    out << "\n| category | distinct a | distinct b | change |\n|---|---:|---:|---:|\n";
    for (auto c : kCategories) {
        const auto& d = delta.corpus_distinct[index_of(c)];
        out << "| " << to_string(c) << " | " << d.a << " | " << d.b << " | "
            << fmt_pct(d.rel_change_pct) << " |\n";
    }
    return out.str();
}

std::string render(const DisclosureDelta& delta, RenderFormat format) {
    if (format == RenderFormat::Json) return delta.to_json().dump(2) + "\n";
    std::ostringstream out;
    out << "# Disclosure diff: " << delta.label_a << " -> " << delta.label_b << "\n\n";
    for (const auto& w : delta.warnings) out << "> Warning: " << w << "\n";
    if (!delta.warnings.empty()) out << "\n";
    for (auto rt : kRiskTypes) {
        for (const auto& g : kGroupings) {
            std::vector<const CellDelta*> rows;
            for (const auto& c : delta.cells)
                if (c.key.risk_type == rt && in_grouping(c.key, g)) rows.push_back(&c);
            if (rows.empty()) continue;
            out << "## " << to_string(rt) << ": " << g.title << "\n\n";
            out << "| cell | k | rate a | rate b | change | relative | direction |\n";
            out << "|---|---:|---:|---:|---:|---:|---|\n";
            for (const auto* c : rows) {
                std::string name = dims_label(c->key, g);
                if (c->presence != Presence::Both) name += " (" + std::string(to_string(c->presence)) + ")";
                for (const auto& r : c->by_k)
                    out << "| " << name << " | " << r.k << " | " << fmt_rate(r.rate_a) << " | "
                        << fmt_rate(r.rate_b) << " | " << fmt_points(r.abs_change) << " | "
                        << fmt_pct(r.rel_change_pct) << " | " << to_string(r.direction) << " |\n";
            }
            out << "\n";
        }
    }
    return out.str();
}

std::string render(const DisclosureReport& report, RenderFormat format) {
    if (format == RenderFormat::Json) return report.to_json().dump(2) + "\n";
    std::ostringstream out;
    out << "# Disclosure report: " << report.run_label << "\n\n";
    out << "Malicious cases: " << report.malicious_cases
        << ", unintentional cases: " << report.unintentional_cases << "\n\n";
    for (auto rt : kRiskTypes) {
        for (const auto& g : kGroupings) {
            std::vector<const Cell*> rows;
            for (const auto& c : report.cells)
                if (c.key.risk_type == rt && in_grouping(c.key, g)) rows.push_back(&c);
            if (rows.empty()) continue;
            out << "## " << to_string(rt) << ": " << g.title << "\n\n| cell | cases |";
            for (int k : report.k_values) out << " pass@" << k << " |";
            out << "\n|---|---:|";
            for (std::size_t i = 0; i < report.k_values.size(); ++i) out << "---:|";
            out << "\n";
            for (const auto* c : rows) {
                out << "| " << dims_label(c->key, g) << " | " << c->n_cases << " |";
                for (int k : report.k_values) out << " " << fmt_rate(rate_at(c, k)) << " |";
                out << "\n";
            }
            out << "\n";
        }
    }
    return out.str();
}

Json GateResult::to_json() const {
    Json v = Json::array();
    for (const auto& x : violations)
        v.push_back({{"cell", x.cell}, {"k", x.k}, {"before", x.before}, {"after", x.after},
                     {"reason", x.reason}});
    return Json{{"kind", "gate_result"},
                {"passed", passed},
                {"cells_checked", cells_checked},
                {"violations", std::move(v)}};
}

GateResult evaluate_gate(const DisclosureDelta& delta, const GateConfig& config) {
    if (config.max_increase < 0) throw ConfigError("max_increase must be >= 0");
    GateResult g;
    for (const auto& c : delta.cells) {
        if (config.risk_type && c.key.risk_type != *config.risk_type) continue;
        for (const auto& r : c.by_k) {
            if (!config.k_values.empty() &&
                std::find(config.k_values.begin(), config.k_values.end(), r.k) == config.k_values.end())
                continue;
            ++g.cells_checked;
            if (r.abs_change && *r.abs_change > config.max_increase) {
                g.violations.push_back({c.key.label(), r.k, *r.rate_a, *r.rate_b, "rate increased"});
            } else if (config.fail_on_new_cells && c.presence == Presence::OnlyB && r.rate_b &&
                       *r.rate_b > config.max_increase) {
                g.violations.push_back({c.key.label(), r.k, 0.0, *r.rate_b, "new cell"});
            }
        }
    }
    g.passed = g.violations.empty();
    return g;
}

GateResult evaluate_gate(const ScanDelta& delta, const ScanGateConfig& config) {
    if (config.max_relative_increase < 0) throw ConfigError("max_relative_increase must be >= 0");
    GateResult g;
    for (const auto& r : delta.rows) {
        ++g.cells_checked;
        const auto& u = r.unique_match_total;
        const bool regressed = u.rel_change ? *u.rel_change > config.max_relative_increase
                                            : u.b > 0;
        if (regressed)
            g.violations.push_back({r.language + "/" + std::string(to_string(r.category)), 0,
                                    static_cast<double>(u.a), static_cast<double>(u.b),
                                    "unique matches increased"});
    }
    g.passed = g.violations.empty();
    return g;
}

}  // namespace leakscope
