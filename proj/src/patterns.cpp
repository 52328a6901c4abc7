// SPDX-License-Identifier: Apache-2.0
#include "leakscope/patterns.hpp"

#include "leakscope/errors.hpp"

#include <boost/regex.hpp>

namespace leakscope {

namespace {

constexpr const char* kBuiltinVersion = "leakscope-patterns/1.0";

// Email: local part, one or more domain labels, then one of the six allowed
// top-level domains (case-insensitive) not followed by more label characters.
std::string email_pattern(std::string_view tld) {
    return std::string(R"((?<![A-Za-z0-9._%+\-])[A-Za-z0-9._%+\-]+@)"
                       R"((?:[A-Za-z0-9](?:[A-Za-z0-9\-]*[A-Za-z0-9])?\.)+)"
                       "(?i:") +
           std::string(tld) + R"()(?![A-Za-z0-9\-]))";
}

std::vector<PatternSpec> builtin_specs() {
    using C = SensitiveCategory;
    std::vector<PatternSpec> specs;
    for (const char* tld : {"com", "org", "net", "edu", "gov", "int"})
        specs.push_back({std::string("email_") + tld, C::Email, email_pattern(tld), "@"});

    // US format: 11 digits starting with 1, never part of a longer digit run.
    specs.push_back({"phone_us11", C::Phone, R"((?<![0-9])1[0-9]{10}(?![0-9]))", ""});

    const std::vector<PatternSpec> secrets = {
        {"aws_access_key_id", C::Secret, R"(AKIA[0-9A-Z]{16})", "AKIA"},
        {"github_pat", C::Secret, R"(ghp_[A-Za-z0-9]{36})", "ghp_"},
        {"github_fine_grained_pat", C::Secret, R"(github_pat_[A-Za-z0-9_]{82})", "github_pat_"},
        {"github_oauth_token", C::Secret, R"(gho_[A-Za-z0-9]{36})", "gho_"},
        {"github_app_user_token", C::Secret, R"(ghu_[A-Za-z0-9]{36})", "ghu_"},
        {"github_app_server_token", C::Secret, R"(ghs_[A-Za-z0-9]{36})", "ghs_"},
        {"github_refresh_token", C::Secret, R"(ghr_[A-Za-z0-9]{36})", "ghr_"},
        {"gitlab_pat", C::Secret, R"(glpat-[A-Za-z0-9_\-]{20})", "glpat-"},
        {"slack_token", C::Secret, R"(xox[baprs]-[0-9A-Za-z]{10,48}(?:-[0-9A-Za-z]{10,48}){0,3})", "xox"},
        {"slack_webhook_url", C::Secret,
         R"(https://hooks\.slack\.com/services/T[A-Z0-9]{8,10}/B[A-Z0-9]{8,10}/[A-Za-z0-9]{24})",
         "hooks.slack.com"},
        {"stripe_live_secret_key", C::Secret, R"(sk_live_[0-9A-Za-z]{24,99})", "sk_live_"},
        {"stripe_live_restricted_key", C::Secret, R"(rk_live_[0-9A-Za-z]{24,99})", "rk_live_"},
        {"google_api_key", C::Secret, R"(AIza[0-9A-Za-z_\-]{35})", "AIza"},
        {"sendgrid_api_key", C::Secret, R"(SG\.[A-Za-z0-9_\-]{22}\.[A-Za-z0-9_\-]{43})", "SG."},
        {"npm_access_token", C::Secret, R"(npm_[A-Za-z0-9]{36})", "npm_"},
        {"pypi_upload_token", C::Secret, R"(pypi-AgEIcHlwaS5vcmc[A-Za-z0-9_\-]{50,})", "pypi-"},
        {"shopify_access_token", C::Secret, R"(shpat_[a-fA-F0-9]{32})", "shpat_"},
    };
    specs.insert(specs.end(), secrets.begin(), secrets.end());
    return specs;
}

}  // namespace

struct PatternTable::Compiled {
    std::vector<boost::regex> regexes;
    // Same patterns wrapped as ^(?:...)$ for whole-surface checks.
    std::vector<boost::regex> anchored;
};

PatternTable::PatternTable(std::string version, std::vector<PatternSpec> specs)
    : version_(std::move(version)), specs_(std::move(specs)) {
    auto compiled = std::make_shared<Compiled>();
    compiled->regexes.reserve(specs_.size());
    for (const auto& s : specs_) {
        if (s.provider.empty()) throw PatternError("pattern with empty provider");
        try {
            compiled->regexes.emplace_back(s.pattern, boost::regex::perl);
            compiled->anchored.emplace_back("\\A(?:" + s.pattern + ")\\z", boost::regex::perl);
        } catch (const boost::regex_error& e) {
            throw PatternError(s.provider + ": " + e.what());
        }
    }
    compiled_ = std::move(compiled);
}

const PatternTable& PatternTable::builtin() {
    static const PatternTable table(kBuiltinVersion, builtin_specs());
    return table;
}

PatternTable PatternTable::from_json(const Json& j) {
    try {
        std::vector<PatternSpec> specs;
        for (const auto& p : j.at("patterns")) {
            const auto cat = parse_category(p.at("category").get<std::string>());
            if (!cat) throw PatternError("unknown category " + p.at("category").dump());
            specs.push_back({p.at("provider").get<std::string>(), *cat,
                             p.at("pattern").get<std::string>(), p.value("required", std::string{})});
        }
        return PatternTable(j.at("version").get<std::string>(), std::move(specs));
    } catch (const nlohmann::json::exception& e) {
        throw PatternError(std::string("malformed pattern table: ") + e.what());
    }
}

PatternTable PatternTable::from_file(const std::filesystem::path& path) {
    return from_json(read_json_file(path));
}

Json PatternTable::to_json() const {
    Json patterns = Json::array();
    for (const auto& s : specs_) {
        Json p = {{"provider", s.provider},
                  {"category", std::string(to_string(s.category))},
                  {"pattern", s.pattern}};
        if (!s.required.empty()) p["required"] = s.required;
        patterns.push_back(std::move(p));
    }
    return Json{{"version", version_}, {"patterns", std::move(patterns)}};
}

const PatternSpec* PatternTable::find(std::string_view provider) const {
    for (const auto& s : specs_)
        if (s.provider == provider) return &s;
    return nullptr;
}

void PatternTable::candidates(SensitiveCategory category, std::string_view text,
                              std::vector<Candidate>& out) const {
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const auto& spec = specs_[i];
        if (spec.category != category) continue;
        if (!spec.required.empty() && text.find(spec.required) == std::string_view::npos)
            continue;
        boost::cregex_iterator it(begin, end, compiled_->regexes[i]);
        for (; it != boost::cregex_iterator(); ++it) {
            const auto& m = (*it)[0];
            if (m.length() == 0) continue;
            out.push_back({static_cast<std::size_t>(m.first - begin),
                           static_cast<std::size_t>(m.second - begin), category, i});
        }
    }
}

bool PatternTable::matches_whole(std::string_view provider, std::string_view surface) const {
    for (std::size_t i = 0; i < specs_.size(); ++i)
        if (specs_[i].provider == provider)
            return boost::regex_search(surface.begin(), surface.end(), compiled_->anchored[i]);
    return false;
}

bool PatternTable::category_matches_whole(SensitiveCategory category,
                                          std::string_view surface) const {
    for (std::size_t i = 0; i < specs_.size(); ++i)
        if (specs_[i].category == category &&
            boost::regex_search(surface.begin(), surface.end(), compiled_->anchored[i]))
            return true;
    return false;
}

}  // namespace leakscope
