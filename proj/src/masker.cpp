// SPDX-License-Identifier: Apache-2.0
#include "leakscope/masker.hpp"

#include "leakscope/errors.hpp"
#include "leakscope/util.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace leakscope {

const GroundTruthSecret* MaskedCase::find_secret(std::string_view secret_id) const {
    for (const auto& s : secrets)
        if (s.secret_id == secret_id) return &s;
    return nullptr;
}

const MaskedCase* AssessmentDataset::find_case(std::string_view case_id) const {
    for (const auto& c : cases)
        if (c.case_id == case_id) return &c;
    return nullptr;
}

MaskedCase mask_record(const PatternTable& table, const CorpusRecord& record,
                       const RecordScanResult& result, std::string case_id,
                       std::string_view mask_token) {
    if (result.matches.empty()) throw NoMatches("record " + record.id + " has no matches");

    MaskedCase out;
    out.case_id = std::move(case_id);
    out.record_id = record.id;
    out.language = record.language;
    out.masked_text.reserve(record.text.size());

    std::size_t cursor = 0;
    for (std::size_t i = 0; i < result.matches.size(); ++i) {
        const auto& m = result.matches[i];
        if (m.start < cursor || m.end > record.text.size() || m.start >= m.end)
            throw MaskResidue("matches of " + record.id + " are unsorted or overlapping");
        out.masked_text.append(record.text, cursor, m.start - cursor);
        GroundTruthSecret s;
        s.secret_id = out.case_id + "#" + std::to_string(i);
        s.case_id = out.case_id;
        s.record_id = record.id;
        s.category = m.category;
        s.provider = m.provider;
        s.surface = m.surface;
        s.masked_start = out.masked_text.size();
        out.masked_text.append(mask_token);
        s.masked_end = out.masked_text.size();
        out.secrets.push_back(std::move(s));
        cursor = m.end;
    }
    out.masked_text.append(record.text, cursor, std::string::npos);

    if (!detect_all(table, out.masked_text).empty())
        throw MaskResidue("masked text of " + record.id + " still contains matches");
    return out;
}

std::string unmask(const MaskedCase& masked) {
    std::string text = masked.masked_text;
    for (auto it = masked.secrets.rbegin(); it != masked.secrets.rend(); ++it)
        text.replace(it->masked_start, it->masked_end - it->masked_start, it->surface);
    return text;
}

SensitiveCategory primary_category(const RecordScanResult& result) {
    auto best = SensitiveCategory::Phone;
    for (const auto& m : result.matches)
        if (priority_rank(m.category) < priority_rank(best)) best = m.category;
    return best;
}

AssessmentBuilder::AssessmentBuilder(const PatternTable& table, DatasetConfig config)
    : table_(&table), config_(std::move(config)) {}

void AssessmentBuilder::add(const CorpusRecord& record, const RecordScanResult& result) {
    if (result.matches.empty()) return;
    matching_.emplace_back(record, result);
}

AssessmentDataset AssessmentBuilder::build() const {
    if (matching_.empty()) throw EmptyScan("no scanned record contained sensitive matches");

    // category -> language -> indices into matching_
    std::map<SensitiveCategory, std::map<Language, std::vector<std::size_t>>> buckets;
    for (std::size_t i = 0; i < matching_.size(); ++i)
        buckets[primary_category(matching_[i].second)][matching_[i].first.language].push_back(i);

    std::vector<std::size_t> selected;
    for (auto cat : kCategories) {
        auto cit = buckets.find(cat);
        if (cit == buckets.end()) continue;
        std::vector<std::vector<std::size_t>> queues;
        for (Language lang : kScannedLanguages) {
            auto lit = cit->second.find(lang);
            if (lit == cit->second.end()) continue;
            auto q = lit->second;
            std::sort(q.begin(), q.end(), [&](std::size_t a, std::size_t b) {
                return matching_[a].first.id < matching_[b].first.id;
            });
            const std::uint64_t stream = config_.seed * 1000003ULL +
                                         static_cast<std::uint64_t>(index_of(cat)) * 101ULL +
                                         static_cast<std::uint64_t>(lang);
            seeded_shuffle(q, stream);
            queues.push_back(std::move(q));
        }
        const std::size_t cap = config_.max_cases_per_category;
        std::size_t taken = 0;
        for (std::size_t round = 0;; ++round) {
            bool any = false;
            for (const auto& q : queues) {
                if (round >= q.size()) continue;
                any = true;
                if (cap != 0 && taken >= cap) break;
                selected.push_back(q[round]);
                ++taken;
            }
            if (!any || (cap != 0 && taken >= cap)) break;
        }
    }

    AssessmentDataset ds;
    ds.release_label = config_.release_label;
    ds.sampling_seed = config_.seed;
    ds.max_cases_per_category = config_.max_cases_per_category;
    ds.mask_token = config_.mask_token;
    ds.pattern_table_version = table_->version();
    ds.corpus_ids = corpus_ids_;
    ds.cases.reserve(selected.size());
    char buf[32];
    for (std::size_t n = 0; n < selected.size(); ++n) {
        const auto& [record, result] = matching_[selected[n]];
        std::snprintf(buf, sizeof buf, "case-%06zu", n + 1);
        ds.cases.push_back(mask_record(*table_, record, result, buf, config_.mask_token));
    }
    return ds;
}

DatasetPaths dataset_paths(const std::filesystem::path& out_dir) {
    return {out_dir / "dataset.cases.jsonl.gz", out_dir / "sensitive" / "dataset.truth.jsonl.gz",
            out_dir / "dataset.meta.json"};
}

void write_dataset(const AssessmentDataset& dataset, const DatasetPaths& paths) {
    std::set<std::string> ids;
    for (const auto& c : dataset.cases)
        if (!ids.insert(c.case_id).second) throw SchemaMismatch("duplicate case id " + c.case_id);

    if (paths.truth.has_parent_path()) prepare_sensitive_dir(paths.truth.parent_path());
    if (paths.cases.has_parent_path()) std::filesystem::create_directories(paths.cases.parent_path());

    GzLineWriter cases(paths.cases);
    GzLineWriter truth(paths.truth, FileMode::Restricted);
    truth.write_line("# SENSITIVE: ground-truth secrets for assessment dataset '" +
                     dataset.release_label + "'. Do not publish or commit this file.");
    for (const auto& c : dataset.cases) {
        Json secrets = Json::array();
        Json truth_secrets = Json::array();
        for (const auto& s : c.secrets) {
            secrets.push_back({{"secret_id", s.secret_id},
                               {"category", std::string(to_string(s.category))},
                               {"provider", s.provider},
                               {"masked_span", {s.masked_start, s.masked_end}},
                               {"surface_sha256", sha256_hex(s.surface)}});
            truth_secrets.push_back({{"secret_id", s.secret_id}, {"surface", s.surface}});
        }
        cases.write_json({{"case_id", c.case_id},
                          {"record_id", c.record_id},
                          {"language", std::string(to_string(c.language))},
                          {"masked_text", c.masked_text},
                          {"secrets", std::move(secrets)}});
        truth.write_json({{"case_id", c.case_id}, {"secrets", std::move(truth_secrets)}});
    }
    cases.close();
    truth.close();

    Json meta = {{"schema_version", AssessmentDataset::kSchemaVersion},
                 {"kind", "assessment_dataset"},
                 {"release_label", dataset.release_label},
                 {"sampling_seed", dataset.sampling_seed},
                 {"max_cases_per_category", dataset.max_cases_per_category},
                 {"mask_token", dataset.mask_token},
                 {"case_count", dataset.cases.size()},
                 {"provenance",
                  {{"pattern_table_version", dataset.pattern_table_version},
                   {"corpus", dataset.corpus_ids}}}};
    write_text_file(paths.meta, meta.dump(2) + "\n");
}

AssessmentDataset read_dataset(const std::filesystem::path& meta_path,
                               const std::filesystem::path& cases_path,
                               const std::filesystem::path& truth_path) {
    AssessmentDataset ds;
    try {
        const Json meta = read_json_file(meta_path);
        if (meta.at("kind") != "assessment_dataset" ||
            meta.at("schema_version").get<int>() != AssessmentDataset::kSchemaVersion)
            throw SchemaMismatch(meta_path.string() + " is not a supported assessment dataset");
        ds.release_label = meta.at("release_label").get<std::string>();
        ds.sampling_seed = meta.at("sampling_seed").get<std::uint64_t>();
        ds.max_cases_per_category = meta.at("max_cases_per_category").get<std::size_t>();
        ds.mask_token = meta.at("mask_token").get<std::string>();
        ds.pattern_table_version = meta.at("provenance").at("pattern_table_version").get<std::string>();
        ds.corpus_ids = meta.at("provenance").at("corpus").get<std::vector<std::string>>();

        std::map<std::string, std::string> surfaces;
        if (!truth_path.empty())
            for (const auto& t : read_jsonl(truth_path))
                for (const auto& s : t.at("secrets"))
                    surfaces[s.at("secret_id").get<std::string>()] = s.at("surface").get<std::string>();

        for (const auto& j : read_jsonl(cases_path)) {
            MaskedCase c;
            c.case_id = j.at("case_id").get<std::string>();
            c.record_id = j.at("record_id").get<std::string>();
            const auto lang = parse_language(j.at("language").get<std::string>());
            if (!lang) throw SchemaMismatch("unknown language in case " + c.case_id);
            c.language = *lang;
            c.masked_text = j.at("masked_text").get<std::string>();
            for (const auto& sj : j.at("secrets")) {
                GroundTruthSecret s;
                s.secret_id = sj.at("secret_id").get<std::string>();
                s.case_id = c.case_id;
                s.record_id = c.record_id;
                const auto cat = parse_category(sj.at("category").get<std::string>());
                if (!cat) throw SchemaMismatch("unknown category in " + s.secret_id);
                s.category = *cat;
                s.provider = sj.at("provider").get<std::string>();
                s.masked_start = sj.at("masked_span").at(0).get<std::size_t>();
                s.masked_end = sj.at("masked_span").at(1).get<std::size_t>();
                if (s.masked_end > c.masked_text.size() || s.masked_start > s.masked_end)
                    throw SchemaMismatch("masked span out of range in " + s.secret_id);
                if (auto it = surfaces.find(s.secret_id); it != surfaces.end()) s.surface = it->second;
                c.secrets.push_back(std::move(s));
            }
            ds.cases.push_back(std::move(c));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(std::string("malformed assessment dataset: ") + e.what());
    }
    return ds;
}

}  // namespace leakscope
