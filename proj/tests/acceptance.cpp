// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include "leakscope/cli.hpp"
#include "leakscope/io.hpp"
#include "leakscope/masker.hpp"
#include "leakscope/oracle_lm.hpp"
#include "leakscope/probe_runner.hpp"
#include "leakscope/prompt_factory.hpp"
#include "leakscope/release_diff.hpp"
#include "leakscope/scanner.hpp"
#include "leakscope/scorer.hpp"
#include "leakscope/sensitive_index.hpp"
#include "leakscope/synth.hpp"
#include "leakscope/util.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace leakscope;
using C = SensitiveCategory;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int cli(std::vector<std::string> args, std::string* err_out = nullptr) {
    args.insert(args.begin(), "leakscope");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (err_out) *err_out = err.str();
    return rc;
}

/// Shared state: the seeded corpus and what later criteria derive from it.
struct Seeded {
    testing::TempDir dir;
    SynthCorpus corpus;
    SynthPaths paths;
    SensitiveIndex index;
    AssessmentDataset dataset;
    std::map<std::string, const CorpusRecord*> by_id;
};

// 1. Seeded-corpus recall through the `scan` command.
void criterion1(Seeded& s) {
    SynthConfig cfg;  // 10,000 records, 150 / 80 / 40
    s.corpus = generate_corpus(cfg);
    s.paths = write_corpus(s.corpus, s.dir / "corpus", 4);
    for (const auto& r : s.corpus.records) s.by_id[r.id] = &r;

    std::string shards;
    for (const auto& p : s.paths.shards) shards += (shards.empty() ? "" : ",") + p.string();
    const auto summary_path = s.dir / "scan" / "summary.json";
    const auto start = std::chrono::steady_clock::now();
    std::string err;
    const int rc = cli({"scan", "--corpus", shards, "--out", summary_path.string(), "--threads", "4",
                        "--label", "seeded"},
                       &err);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (rc != kExitOk) {
        report(1, false, "scan exited " + std::to_string(rc) + ": " + err);
        return;
    }
    const auto summary = ScanSummary::from_json(read_json_file(summary_path));
    s.index = SensitiveIndex::from_json(read_json_file(s.dir / "scan" / "sensitive" / "index.json"));

    // Independent ground truth: the generator's own plant list.
    PerCategory<std::uint64_t> truth{};
    std::map<Language, PerCategory<std::uint64_t>> truth_lang;
    std::map<Language, std::uint64_t> truth_records;
    PerCategory<std::set<std::string>> truth_surfaces;
    for (const auto& p : s.corpus.planted) {
        ++truth[index_of(p.category)];
        ++truth_lang[p.language][index_of(p.category)];
        truth_surfaces[index_of(p.category)].insert(normalize_surface(p.category, p.surface));
    }
    for (const auto& r : s.corpus.records)
        if (r.language != Language::Other) ++truth_records[r.language];

    bool splits = true;
    for (auto lang : kScannedLanguages) {
        const auto& st = summary.per_language.at(lang);
        splits &= st.record_count == truth_records[lang];
        splits &= st.unique_match_total == truth_lang[lang];
    }
    std::size_t false_pos = 0, missed = 0;
    for (auto c : kCategories) {
        for (const auto& surf : s.index.surfaces(c))
            if (!truth_surfaces[index_of(c)].count(surf)) ++false_pos;
        for (const auto& surf : truth_surfaces[index_of(c)])
            if (!s.index.surfaces(c).count(surf)) ++missed;
    }
    const auto& u = summary.totals.unique_match_total;
    const bool ok = u == truth && truth == PerCategory<std::uint64_t>{150, 80, 40} && splits &&
                    false_pos == 0 && missed == 0 && secs < 30.0;
    report(1, ok,
           fmt("%zu records; unique email/phone/secret %llu/%llu/%llu (expected 150/80/40); "
               "per-language splits %s; false positives %zu; missed %zu; scan %.2f s on 4 threads",
               s.corpus.records.size(), (unsigned long long)u[0], (unsigned long long)u[1],
               (unsigned long long)u[2], splits ? "match" : "DIFFER", false_pos, missed, secs));
}

// 2. Mask hygiene over the seeded run plus a denser seeded corpus.
void criterion2(Seeded& s) {
    const auto& table = PatternTable::builtin();
    DatasetConfig dc;
    dc.max_cases_per_category = 0;
    dc.seed = 7;

    auto check = [&](const SynthCorpus& corpus, std::size_t& cases, std::size_t& residue,
                     std::size_t& mismatch) -> AssessmentDataset {
        AssessmentBuilder b(table, dc);
        std::map<std::string, const CorpusRecord*> ids;
        for (const auto& r : corpus.records) {
            ids[r.id] = &r;
            if (r.language != Language::Other) b.add(r, scan_record(table, r));
        }
        auto ds = b.build();
        for (const auto& c : ds.cases) {
            ++cases;
            if (!detect_all(table, c.masked_text).empty()) ++residue;
            if (unmask(c) != ids.at(c.record_id)->text) ++mismatch;
        }
        return ds;
    };

    std::size_t cases = 0, residue = 0, mismatch = 0;
    s.dataset = check(s.corpus, cases, residue, mismatch);
    const std::size_t seeded_cases = cases;

    SynthConfig dense;
    dense.records = 4000;
    dense.emails = 600;
    dense.phones = 300;
    dense.secrets = 200;
    dense.seed = 99;
    check(generate_corpus(dense), cases, residue, mismatch);

    report(2, cases >= 1000 && residue == 0 && mismatch == 0 && seeded_cases == 270,
           fmt("%zu cases (%zu from the seeded run, %zu from a denser seeded corpus); "
               "masked texts with matches %zu; unmask mismatches %zu",
               cases, seeded_cases, cases - seeded_cases, residue, mismatch));
}

// 3. Estimator against subset enumeration, plus monotonicity.
void criterion3() {
    double worst = 0;
    std::size_t combos = 0, mono_violations = 0;
    for (int n = 1; n <= 12; ++n)
        for (int c = 0; c <= n; ++c)
            for (int k = 1; k <= n; ++k) {
                worst = std::max(worst, std::abs(pass_at_k_estimator(n, c, k) -
                                                 testing::brute_force_pass_at_k(n, c, k)));
                ++combos;
                if (k < n && pass_at_k_estimator(n, c, k) > pass_at_k_estimator(n, c, k + 1)) ++mono_violations;
                if (c < n && pass_at_k_estimator(n, c, k) > pass_at_k_estimator(n, c + 1, k)) ++mono_violations;
            }
    const double ref = pass_at_k_estimator(10, 3, 5);
    report(3, worst <= 1e-12 && mono_violations == 0 && std::abs(ref - 11.0 / 12.0) <= 1e-12,
           fmt("%zu (n,c,k) triples, max |estimator - enumeration| = %.3g; monotonicity violations %zu; "
               "(10,3,5) = %.6f",
               combos, worst, mono_violations, ref));
}

std::shared_ptr<Oracle> seeded_oracle(const Seeded& s) {
    return std::make_shared<Oracle>(build_oracle(s.corpus.records, 32));
}

// 4. Oracle extraction discriminates PS_3 from PS_1.
void criterion4(const Seeded& s) {
    auto oracle = seeded_oracle(s);
    OracleClient client(oracle);
    const auto prompts = generate_malicious_suite(s.dataset, {Strategy::PS_1, Strategy::PS_3},
                                                  TemplateSet::builtin());
    EndpointConfig ep;
    ep.attempts = 1;
    ep.sampling.temperature = 0;
    const auto attempts = run_probes(prompts, ep, client);
    const auto truth = truth_map(s.dataset);
    const auto judgments = judge_all(attempts, prompts, s.index, truth);

    // Unique trailing window, checked by plain substring counting over the corpus.
    auto window_unique = [&](const GroundTruthSecret& g) {
        const auto& text = s.by_id.at(g.record_id)->text;
        const auto& masked = s.dataset.find_case(g.case_id)->masked_text;
        const std::string_view prefix = std::string_view(masked).substr(0, g.masked_start);
        if (prefix.size() < 32 || text.compare(0, prefix.size(), prefix) != 0) return false;
        const auto window = prefix.substr(prefix.size() - 32);
        std::size_t n = 0;
        for (const auto& r : s.corpus.records) {
            // Only windows that have a continuation are indexed.
            const std::string_view t(r.text);
            for (auto pos = t.find(window); pos != std::string_view::npos; pos = t.find(window, pos + 1))
                if (pos + 32 < t.size()) ++n;
        }
        return n == 1;
    };

    std::size_t ps3_unique = 0, ps3_hit = 0, ps3_total = 0, ps1_total = 0, ps1_hit = 0;
    std::map<std::string, const PromptCase*> by_prompt;
    for (const auto& p : prompts) by_prompt[p.prompt_id] = &p;
    for (const auto& j : judgments) {
        const auto& p = *by_prompt.at(j.prompt_id);
        if (p.strategy == Strategy::PS_1) {
            ++ps1_total;
            ps1_hit += j.disclosed;
        } else {
            ++ps3_total;
            if (window_unique(truth.at(*p.expected_secret_id))) {
                ++ps3_unique;
                ps3_hit += j.disclosed;
            }
        }
    }
    const auto rep = aggregate_report(judgments, prompts, {1});
    CellKey ps3, ps1;
    ps3.strategy = "PS_3";
    ps1.strategy = "PS_1";
    const double r3 = ps3_unique ? static_cast<double>(ps3_hit) / ps3_unique : 0.0;
    const double r1 = rep.rate(ps1, 1).value_or(-1);
    report(4, ps3_unique > 0 && r3 == 1.0 && r1 == 0.0 && ps1_hit == 0,
           fmt("W=32; PS_3 pass@1 = %.3f over %zu/%zu secrets with unique windows "
               "(report cell %.3f); PS_1 pass@1 = %.3f over %zu secrets",
               r3, ps3_unique, ps3_total, rep.rate(ps3, 1).value_or(-1), r1, ps1_total));
}

// 5. Unintentional baseline and judge sensitivity.
void criterion5(const Seeded& s) {
    std::vector<SuiteSource> sources;
    for (auto [tag, file] : {std::pair{"HumanEval", "humaneval_sample.jsonl"},
                             std::pair{"MBPP", "mbpp_sample.jsonl"},
                             std::pair{"MATH", "math_sample.jsonl"}}) {
        SuiteSource b;
        b.kind = SuiteSource::Kind::Benchmark;
        b.dataset_tag = tag;
        b.path = std::filesystem::path(LEAKSCOPE_DATA_DIR) / "benchmarks" / file;
        sources.push_back(b);
    }
    SuiteSource unit, obj;
    unit.kind = SuiteSource::Kind::Unit;
    unit.count = 40;
    obj.kind = SuiteSource::Kind::Object;
    obj.count = 40;
    sources.push_back(unit);
    sources.push_back(obj);
    auto prompts = generate_unintentional_suite(sources, 1);
    drop_impure_prompts(prompts, s.index);

    EndpointConfig ep;
    ep.attempts = 10;
    ep.sampling.temperature = 0;
    auto oracle = seeded_oracle(s);
    auto score = [&] {
        OracleClient client(oracle);
        const auto attempts = run_probes(prompts, ep, client);
        return aggregate_report(judge_all(attempts, prompts, s.index, {}), prompts, {10});
    };

    const auto base = score();
    std::size_t base_nonzero = 0, cells = 0;
    for (const auto& c : base.cells) {
        ++cells;
        if (c.by_k.at(10).rate != 0.0) ++base_nonzero;
    }

    const std::string email = *s.index.surfaces(C::Email).begin();
    oracle->set_default_output(std::string(Oracle::kDefaultOutput) + "# maintainer: " + email + "\n");
    const auto injected = score();
    // Affected cells: every category-agnostic cell and every email cell.
    std::size_t wrong = 0;
    for (const auto& c : injected.cells) {
        const bool affected = c.key.category == kAll || c.key.category == "email";
        if (c.by_k.at(10).rate != (affected ? 1.0 : 0.0)) ++wrong;
    }
    report(5, base_nonzero == 0 && wrong == 0 && cells > 0,
           fmt("%zu prompts (HumanEval/MBPP/MATH/UNIT/OBJECT), %zu cells; baseline nonzero pass@10 "
               "cells %zu; after injecting one indexed email, cells off their expected value %zu",
               prompts.size(), cells, base_nonzero, wrong));
}

// 6. A valid but wrong phone number is a failed attack yet an unintentional disclosure.
void criterion6(const Seeded& s) {
    const GroundTruthSecret* target = nullptr;
    const MaskedCase* mcase = nullptr;
    for (const auto& c : s.dataset.cases)
        for (const auto& g : c.secrets)
            if (!target && g.category == C::Phone) {
                target = &g;
                mcase = &c;
            }
    std::string other;
    for (const auto& p : s.index.surfaces(C::Phone))
        if (p != target->surface) {
            other = p;
            break;
        }
    const auto prompt = render_malicious_prompt(*mcase, *target, Strategy::PS_3);
    ProbeAttempt a;
    a.prompt_id = prompt.prompt_id;
    a.output_text = "phone = \"" + other + "\"\n";
    const bool malicious = judge_attempt(a, prompt, s.index, target).disclosed;

    PromptCase u;
    u.prompt_id = "u:check";
    u.risk_type = RiskType::Unintentional;
    u.dataset_tag = "UNIT";
    ProbeAttempt ua = a;
    ua.prompt_id = u.prompt_id;
    const bool unintentional = judge_attempt(ua, u, s.index, nullptr).disclosed;

    a.output_text = "phone = \"" + target->surface + "\"\n";
    const bool right = judge_attempt(a, prompt, s.index, target).disclosed;
    report(6, !malicious && unintentional && right && !other.empty(),
           fmt("wrong indexed phone: malicious disclosed=%s, unintentional disclosed=%s; "
               "expected phone: malicious disclosed=%s",
               malicious ? "true" : "false", unintentional ? "true" : "false", right ? "true" : "false"));
}

// 7. Release-diff arithmetic on summaries built to embody the published relationships.
void criterion7() {
    ScanSummary a, b;
    a.release_label = "older";
    b.release_label = "newer";
    a.pattern_table_version = b.pattern_table_version = "v";
    a.totals.record_count = 89'937'427;
    b.totals.record_count = 93'856'361;
    a.totals.unique_match_total = {1000, 100, 1000};
    b.totals.unique_match_total = {90, 169, 350};
    const auto d = diff_scans(a, b);
    const auto pct = [&](C c) { return *d.find("*", c)->unique_match_total.rel_change_pct; };
    const double size_exact = *d.corpus_size.rel_change * 100.0;

    DisclosureReport ra, rb;
    ra.k_values = rb.k_values = {10};
    Cell ca;
    ca.n_cases = 10000;
    ca.by_k[10] = {187, 0.0187, 0.0187};
    Cell cb = ca;
    cb.by_k[10] = {241, 0.0241, 0.0241};
    ra.cells = {ca};
    rb.cells = {cb};
    const auto rd = diff_reports(ra, rb);
    const double mal = *rd.cells.at(0).at_k(10)->rel_change_pct;

    const bool ok = pct(C::Email) == -91.0 && pct(C::Secret) == -65.0 && pct(C::Phone) == 69.0 &&
                    std::abs(size_exact - 4.36) <= 0.05 && mal == 28.9 && std::lround(mal) == 29;
    report(7, ok,
           fmt("emails %+.1f%% (reference -91%%), secrets %+.1f%% (-65%%), phones %+.1f%% (+69%%), "
               "corpus %+.4f%% (+4.36%%), malicious pass@10 %+.1f%% (29%%)",
               pct(C::Email), pct(C::Secret), pct(C::Phone), size_exact, mal));
}

// 8. Absolute OLMo-scale rates are out of reach; the README must say so.
void criterion8() {
    const auto readme = std::filesystem::path(LEAKSCOPE_DATA_DIR).parent_path() / "README.md";
    std::string text;
    try {
        text = read_text_file(readme);
    } catch (const std::exception&) {
    }
    const bool documented = text.find("Not reproduced") != std::string::npos;
    report(8, documented,
           documented ? "absolute OLMo-7B/Dolma disclosure rates are not reproduced at desk scale; "
                        "README states this under \"Not reproduced\""
                      : "README lacks the non-reproduction statement");
}

}  // namespace

int main() {
    Seeded s;
    try {
        criterion1(s);
        criterion2(s);
        criterion3();
        criterion4(s);
        criterion5(s);
        criterion6(s);
        criterion7();
        criterion8();
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
