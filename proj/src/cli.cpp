// SPDX-License-Identifier: Apache-2.0
#include "leakscope/cli.hpp"

#include "leakscope/errors.hpp"
#include "leakscope/masker.hpp"
#include "leakscope/oracle_lm.hpp"
#include "leakscope/patterns.hpp"
#include "leakscope/probe_runner.hpp"
#include "leakscope/prompt_factory.hpp"
#include "leakscope/release_diff.hpp"
#include "leakscope/scanner.hpp"
#include "leakscope/scorer.hpp"
#include "leakscope/sensitive_index.hpp"
#include "leakscope/util.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

namespace leakscope {

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "leakscope 0.1.0";

// Provenance record written next to every output. `options` is a TOML
// config that reproduces the run via `--config`.
class Manifest {
public:
    Manifest(std::string subcommand, const CLI::App& app)
        : subcommand_(std::move(subcommand)),
          options_("[" + subcommand_ + "]\n" + app.config_to_str(true, false)),
          started_(utc_timestamp()) {}

    void input(const fs::path& p) {
        std::string digest;
        try {
            digest = sha256_hex(read_text_file(p));
        } catch (const Error&) {
        }
        inputs_.push_back({{"path", fs::absolute(p).string()}, {"sha256", digest}});
    }
    void output(const fs::path& p) { outputs_.push_back(fs::absolute(p).string()); }
    void link(const std::string& key, const fs::path& p) { links_[key] = fs::absolute(p).string(); }
    void pattern_version(std::string v) { pattern_version_ = std::move(v); }
    void extra(const std::string& key, Json value) { extra_[key] = std::move(value); }

    void write(const fs::path& path) const {
        Json j{{"kind", "manifest"},
               {"tool", kToolVersion},
               {"subcommand", subcommand_},
               {"config_hash", sha256_hex(options_)},
               {"pattern_table_version", pattern_version_},
               {"started", started_},
               {"finished", utc_timestamp()},
               {"options", options_},
               {"inputs", inputs_},
               {"outputs", outputs_},
               {"links", links_}};
        for (const auto& [k, v] : extra_.items()) j[k] = v;
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        write_text_file(path, j.dump(2) + "\n");
    }

    std::string config_hash() const { return sha256_hex(options_); }

private:
    std::string subcommand_;
    std::string options_;
    std::string started_;
    std::string pattern_version_;
    Json inputs_ = Json::array();
    Json outputs_ = Json::array();
    Json links_ = Json::object();
    Json extra_ = Json::object();
};

fs::path manifest_for_file(const fs::path& out) {
    return out.parent_path() / (out.filename().string() + ".manifest.json");
}

PatternTable load_patterns(const std::string& path) {
    return path.empty() ? PatternTable::builtin() : PatternTable::from_file(path);
}

std::vector<fs::path> corpus_shards(const std::vector<std::string>& globs) {
    auto shards = expand_globs(globs);
    if (shards.empty()) throw IoError("corpus globs matched no files");
    for (const auto& s : shards)
        if (!fs::exists(s)) throw IoError("corpus shard not found: " + s.string());
    return shards;
}

std::vector<CorpusRecord> read_records(const std::vector<fs::path>& shards, std::ostream& err) {
    std::vector<CorpusRecord> records;
    std::size_t bad = 0;
    for (const auto& shard : shards) {
        GzLineReader reader(shard);
        std::string line;
        while (reader.next(line)) {
            if (line.empty()) continue;
            try {
                records.push_back(parse_corpus_line(line));
            } catch (const ShardParseError&) {
                ++bad;
            }
        }
    }
    if (bad) err << "warning: skipped " << bad << " unparseable corpus lines\n";
    return records;
}

void write_or_print(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text_file(p, content);
}

std::shared_ptr<const Oracle> load_oracle(const std::vector<std::string>& globs, std::size_t window,
                                          const std::string& default_output, std::ostream& err) {
    const auto records = read_records(corpus_shards(globs), err);
    auto oracle = std::make_shared<Oracle>(build_oracle(records, window));
    if (!default_output.empty()) oracle->set_default_output(default_output);
    err << "oracle: indexed " << oracle->entry_count() << " windows from " << records.size()
        << " records\n";
    return oracle;
}

// Finds a probe manifest next to an attempts file: <dir>/manifest.json or
// one level up when attempts live under sensitive/.
std::optional<Json> probe_manifest_for(const fs::path& attempts) {
    for (auto dir = attempts.parent_path(); !dir.empty();) {
        const auto m = dir / "manifest.json";
        if (fs::exists(m)) {
            Json j = read_json_file(m);
            if (j.value("subcommand", "") == "probe") return j;
        }
        if (dir.filename() != "sensitive") break;
        dir = dir.parent_path();
    }
    return std::nullopt;
}

std::string link_of(const std::optional<Json>& manifest, const char* key) {
    if (!manifest || !manifest->contains("links")) return {};
    return manifest->at("links").value(key, std::string{});
}

struct Kind {
    std::string kind;
    Json doc;
};

Kind read_document(const std::string& path) {
    Json j = read_json_file(path);
    if (!j.is_object() || !j.contains("kind")) throw SchemaMismatch(path + " has no 'kind' field");
    return {j.at("kind").get<std::string>(), std::move(j)};
}

// ---- subcommands ------------------------------------------------------------

struct ScanOpts {
    std::vector<std::string> corpus;
    std::string patterns;
    std::string out;
    std::string index;
    std::string label = "unlabeled";
    int threads = 0;
    bool serial = false;
    std::size_t batch_lines = 4096;
};

int cmd_scan(const ScanOpts& o, const CLI::App& app, std::ostream& out, std::ostream& err) {
    (void)out;
    Manifest manifest("scan", app);
    const auto table = load_patterns(o.patterns);
    manifest.pattern_version(table.version());
    const auto shards = corpus_shards(o.corpus);

    SensitiveIndex index(o.label, table.version());
    ScanConfig cfg;
    cfg.release_label = o.label;
    cfg.parallel = !o.serial;
    cfg.threads = o.threads;
    cfg.batch_lines = o.batch_lines;
    const auto summary = scan_corpus(table, shards, cfg, [&](const CorpusRecord&, const RecordScanResult& r) {
        for (const auto& m : r.matches) index.insert(m.category, m.surface);
    });

    const fs::path out_path(o.out);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_text_file(out_path, summary.to_json().dump(2) + "\n");

    const fs::path index_path =
        o.index.empty() ? out_path.parent_path() / "sensitive" / "index.json" : fs::path(o.index);
    prepare_sensitive_dir(index_path.parent_path());
    write_text_file(index_path, index.to_json().dump() + "\n", FileMode::Restricted);

    for (const auto& s : shards) manifest.input(s);
    if (!o.patterns.empty()) manifest.input(o.patterns);
    manifest.output(out_path);
    manifest.output(index_path);
    manifest.link("index", index_path);
    manifest.write(manifest_for_file(out_path));

    const auto& t = summary.totals;
    err << "scan: " << t.record_count << " records; unique emails " << t.unique_match_total[0]
        << ", phones " << t.unique_match_total[1] << ", secrets " << t.unique_match_total[2]
        << "; " << summary.errors.parse_errors << " parse errors\n";
    return kExitOk;
}

struct MaskOpts {
    std::vector<std::string> corpus;
    std::string patterns;
    std::string out;
    std::string label = "unlabeled";
    std::size_t max_per_category = 100;
    std::uint64_t seed = 0;
    std::string mask_token{kMaskToken};
};

int cmd_mask(const MaskOpts& o, const CLI::App& app, std::ostream&, std::ostream& err) {
    Manifest manifest("mask", app);
    const auto table = load_patterns(o.patterns);
    manifest.pattern_version(table.version());
    const auto shards = corpus_shards(o.corpus);

    DatasetConfig dc;
    dc.release_label = o.label;
    dc.max_cases_per_category = o.max_per_category;
    dc.seed = o.seed;
    dc.mask_token = o.mask_token;
    AssessmentBuilder builder(table, dc);
    std::vector<std::string> ids;
    ScanConfig cfg;
    cfg.release_label = o.label;
    scan_corpus(table, shards, cfg, [&](const CorpusRecord& rec, const RecordScanResult& r) {
        ids.push_back(rec.id);
        builder.add(rec, r);
    });
    builder.set_corpus_ids(std::move(ids));
    const auto dataset = builder.build();

    const fs::path dir(o.out);
    const auto paths = dataset_paths(dir);
    write_dataset(dataset, paths);

    for (const auto& s : shards) manifest.input(s);
    manifest.output(paths.cases);
    manifest.output(paths.truth);
    manifest.output(paths.meta);
    manifest.extra("cases", dataset.cases.size());
    manifest.write(dir / "manifest.json");
    err << "mask: " << dataset.cases.size() << " cases written to " << dir.string() << "\n";
    return kExitOk;
}

struct PromptsOpts {
    std::string dataset;
    std::vector<std::string> strategies;
    std::string templates;
    std::vector<std::string> benchmarks;  // TAG=PATH
    std::size_t unit = 0;
    std::size_t object = 0;
    std::uint64_t seed = 0;
    std::string index;
    std::string out;
};

int cmd_prompts(const PromptsOpts& o, const CLI::App& app, std::ostream&, std::ostream& err) {
    Manifest manifest("prompts", app);
    std::vector<PromptCase> prompts;

    if (!o.dataset.empty()) {
        const auto paths = dataset_paths(o.dataset);
        const auto dataset = read_dataset(paths.meta, paths.cases, paths.truth);
        manifest.pattern_version(dataset.pattern_table_version);
        const TemplateSet templates =
            o.templates.empty() ? TemplateSet::builtin() : TemplateSet::from_json(read_json_file(o.templates));
        std::vector<Strategy> strategies;
        if (o.strategies.empty()) {
            strategies.assign(kStrategies.begin(), kStrategies.end());
        } else {
            for (const auto& s : o.strategies) {
                const auto st = parse_strategy(s);
                if (!st) throw ConfigError("unknown strategy '" + s + "'");
                strategies.push_back(*st);
            }
        }
        SuiteStats stats;
        auto mal = generate_malicious_suite(dataset, strategies, templates, &stats);
        err << "prompts: " << stats.rendered << " malicious prompts (" << stats.prefix_too_short
            << " skipped for short prefix, " << stats.surface_leak << " for surface leak)\n";
        prompts.insert(prompts.end(), mal.begin(), mal.end());
        manifest.input(paths.meta);
        manifest.link("dataset", o.dataset);
    }

    std::vector<SuiteSource> sources;
    for (const auto& b : o.benchmarks) {
        const auto eq = b.find('=');
        if (eq == std::string::npos) throw ConfigError("--benchmark expects TAG=PATH, got '" + b + "'");
        SuiteSource s;
        s.kind = SuiteSource::Kind::Benchmark;
        s.dataset_tag = b.substr(0, eq);
        s.path = b.substr(eq + 1);
        manifest.input(s.path);
        sources.push_back(std::move(s));
    }
    if (o.unit > 0) {
        SuiteSource s;
        s.kind = SuiteSource::Kind::Unit;
        s.dataset_tag = "UNIT";
        s.count = o.unit;
        sources.push_back(std::move(s));
    }
    if (o.object > 0) {
        SuiteSource s;
        s.kind = SuiteSource::Kind::Object;
        s.dataset_tag = "OBJECT";
        s.count = o.object;
        sources.push_back(std::move(s));
    }
    if (!sources.empty()) {
        auto un = generate_unintentional_suite(sources, o.seed);
        if (!o.index.empty()) {
            const auto index = SensitiveIndex::from_json(read_json_file(o.index));
            const auto dropped = drop_impure_prompts(un, index);
            if (dropped) err << "prompts: dropped " << dropped << " prompts that already contain index surfaces\n";
            manifest.link("index", o.index);
        }
        err << "prompts: " << un.size() << " unintentional prompts\n";
        prompts.insert(prompts.end(), un.begin(), un.end());
    }
    if (prompts.empty()) throw ConfigError("nothing to generate: pass --dataset and/or a benchmark/UNIT/OBJECT source");

    write_prompts(prompts, o.out);
    manifest.output(o.out);
    manifest.extra("prompts", prompts.size());
    manifest.write(manifest_for_file(o.out));
    return kExitOk;
}

struct ProbeOpts {
    std::string prompts;
    std::string out;
    EndpointConfig endpoint;
    long long timeout_ms = 30000;
    long long backoff_base_ms = 200;
    long long backoff_cap_ms = 10000;
    std::vector<std::string> oracle_corpus;
    std::size_t oracle_window = Oracle::kDefaultWindow;
    std::string oracle_default_output;
};

int cmd_probe(ProbeOpts o, const CLI::App& app, std::ostream&, std::ostream& err) {
    Manifest manifest("probe", app);
    o.endpoint.timeout = std::chrono::milliseconds(o.timeout_ms);
    o.endpoint.backoff_base = std::chrono::milliseconds(o.backoff_base_ms);
    o.endpoint.backoff_cap = std::chrono::milliseconds(o.backoff_cap_ms);
    o.endpoint.validate();

    const auto prompts = read_prompts(o.prompts);
    std::shared_ptr<const Oracle> oracle;
    if (o.endpoint.url.rfind("oracle:", 0) == 0) {
        if (o.oracle_corpus.empty()) throw ConfigError("the oracle endpoint needs --oracle-corpus");
        oracle = load_oracle(o.oracle_corpus, o.oracle_window, o.oracle_default_output, err);
    }
    auto client = make_client(o.endpoint, oracle);
    const auto attempts = run_probes(prompts, o.endpoint, *client);

    const fs::path dir(o.out);
    prepare_sensitive_dir(dir / "sensitive");
    const auto attempts_path = dir / "sensitive" / "attempts.jsonl.gz";
    write_attempts(attempts, attempts_path);

    std::size_t failed = 0;
    for (const auto& a : attempts) failed += !a.ok;
    manifest.input(o.prompts);
    manifest.output(attempts_path);
    manifest.link("prompts", o.prompts);
    // Carry the dataset link forward so `score` can find ground truth.
    const auto pm = manifest_for_file(o.prompts);
    if (fs::exists(pm)) {
        const Json pj = read_json_file(pm);
        if (pj.contains("links")) {
            for (const char* key : {"dataset", "index"})
                if (pj.at("links").contains(key)) manifest.link(key, pj.at("links").at(key).get<std::string>());
            manifest.pattern_version(pj.value("pattern_table_version", std::string{}));
        }
    }
    manifest.extra("endpoint", o.endpoint.to_json());
    manifest.extra("endpoint_config_hash", o.endpoint.config_hash());
    manifest.extra("attempts", attempts.size());
    manifest.extra("failed_attempts", failed);
    manifest.write(dir / "manifest.json");
    err << "probe: " << attempts.size() << " attempts over " << prompts.size() << " prompts, " << failed
        << " failed\n";
    return kExitOk;
}

struct ScoreOpts {
    std::string attempts;
    std::string prompts;
    std::string index;
    std::string dataset;
    std::vector<int> k{1, 5, 10};
    std::string label;
    std::string out;
    std::string csv;
    std::string markdown;
};

int cmd_score(ScoreOpts o, const CLI::App& app, std::ostream& out, std::ostream& err) {
    Manifest manifest("score", app);
    const auto pm = probe_manifest_for(o.attempts);
    if (o.prompts.empty()) o.prompts = link_of(pm, "prompts");
    if (o.dataset.empty()) o.dataset = link_of(pm, "dataset");
    if (o.index.empty()) o.index = link_of(pm, "index");
    if (o.prompts.empty()) throw ConfigError("--prompts not given and no probe manifest names one");
    if (o.index.empty()) throw ConfigError("--index not given and no probe manifest names one");

    const auto attempts = read_attempts(o.attempts);
    const auto prompts = read_prompts(o.prompts);
    const auto index = SensitiveIndex::from_json(read_json_file(o.index));
    manifest.pattern_version(index.pattern_version());

    TruthMap truth;
    const bool any_malicious = std::any_of(prompts.begin(), prompts.end(),
                                           [](const PromptCase& p) { return p.risk_type == RiskType::Malicious; });
    if (any_malicious) {
        if (o.dataset.empty()) throw ConfigError("malicious prompts need --dataset for ground truth");
        const auto paths = dataset_paths(o.dataset);
        truth = truth_map(read_dataset(paths.meta, paths.cases, paths.truth));
        manifest.input(paths.meta);
    }

    const auto judgments = judge_all(attempts, prompts, index, truth);
    std::string config_hash;
    if (pm) config_hash = pm->value("endpoint_config_hash", std::string{});
    const auto report = aggregate_report(judgments, prompts, o.k,
                                         o.label.empty() ? "run" : o.label, config_hash);

    write_or_print(o.out, report.to_json().dump(2) + "\n", out);
    if (!o.csv.empty()) write_text_file(o.csv, report.to_csv());
    if (!o.markdown.empty()) write_text_file(o.markdown, render(report, RenderFormat::Markdown));

    manifest.input(o.attempts);
    manifest.input(o.prompts);
    manifest.input(o.index);
    if (!o.out.empty() && o.out != "-") {
        manifest.output(o.out);
        manifest.write(manifest_for_file(o.out));
    }
    err << "score: " << judgments.size() << " judgments, " << report.malicious_cases << " malicious and "
        << report.unintentional_cases << " unintentional cases\n";
    return kExitOk;
}

struct DiffOpts {
    std::string before;
    std::string after;
    std::string format = "markdown";
    std::string out;
};

int cmd_diff(const DiffOpts& o, const CLI::App& app, std::ostream& out, std::ostream& err) {
    Manifest manifest("diff", app);
    const auto fmt = parse_render_format(o.format);
    if (!fmt) throw ConfigError("unknown format '" + o.format + "' (json|markdown)");
    const auto a = read_document(o.before);
    const auto b = read_document(o.after);
    if (a.kind != b.kind) throw SchemaMismatch("cannot diff a " + a.kind + " against a " + b.kind);

    std::string doc;
    std::vector<std::string> warnings;
    if (a.kind == "scan_summary") {
        const auto d = diff_scans(ScanSummary::from_json(a.doc), ScanSummary::from_json(b.doc));
        warnings = d.warnings;
        manifest.pattern_version(d.pattern_version_b);
        doc = render(d, *fmt);
    } else if (a.kind == "disclosure_report") {
        const auto d = diff_reports(DisclosureReport::from_json(a.doc), DisclosureReport::from_json(b.doc));
        warnings = d.warnings;
        doc = render(d, *fmt);
    } else {
        throw SchemaMismatch("diff supports scan_summary and disclosure_report, not " + a.kind);
    }
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    write_or_print(o.out, doc, out);
    manifest.input(o.before);
    manifest.input(o.after);
    if (!o.out.empty() && o.out != "-") {
        manifest.output(o.out);
        manifest.write(manifest_for_file(o.out));
    }
    return kExitOk;
}

struct GateOpts {
    std::string before;
    std::string after;
    double max_increase = 0.0;
    std::vector<int> k;
    std::string risk_type;
    bool fail_on_new_cells = false;
    std::string out;
};

int cmd_gate(const GateOpts& o, const CLI::App&, std::ostream& out, std::ostream& err) {
    const auto a = read_document(o.before);
    const auto b = read_document(o.after);
    if (a.kind != b.kind) throw SchemaMismatch("cannot gate a " + a.kind + " against a " + b.kind);

    GateResult result;
    if (a.kind == "disclosure_report") {
        GateConfig cfg;
        cfg.max_increase = o.max_increase;
        cfg.k_values = o.k;
        cfg.fail_on_new_cells = o.fail_on_new_cells;
        if (!o.risk_type.empty()) {
            cfg.risk_type = parse_risk_type(o.risk_type);
            if (!cfg.risk_type) throw ConfigError("unknown risk type '" + o.risk_type + "'");
        }
        result = evaluate_gate(diff_reports(DisclosureReport::from_json(a.doc), DisclosureReport::from_json(b.doc)), cfg);
    } else if (a.kind == "scan_summary") {
        ScanGateConfig cfg;
        cfg.max_relative_increase = o.max_increase;
        result = evaluate_gate(diff_scans(ScanSummary::from_json(a.doc), ScanSummary::from_json(b.doc)), cfg);
    } else {
        throw SchemaMismatch("gate supports scan_summary and disclosure_report, not " + a.kind);
    }
    write_or_print(o.out, result.to_json().dump(2) + "\n", out);
    for (const auto& v : result.violations)
        err << "regression: " << v.cell << (v.k ? " pass@" + std::to_string(v.k) : std::string{}) << " "
            << v.before << " -> " << v.after << " (" << v.reason << ")\n";
    err << "gate: " << (result.passed ? "pass" : "FAIL") << ", " << result.cells_checked << " cells checked\n";
    return result.passed ? kExitOk : kExitRegression;
}

struct ServeOpts {
    std::vector<std::string> corpus;
    std::size_t window = Oracle::kDefaultWindow;
    std::string default_output;
    std::string host = "127.0.0.1";
    int port = 8080;
};

int cmd_serve(const ServeOpts& o, const CLI::App&, std::ostream&, std::ostream& err) {
    auto oracle = load_oracle(o.corpus, o.window, o.default_output, err);
    OracleServer server(oracle);
    const int port = server.bind(o.host, o.port);
    err << "oracle-serve: listening on http://" << o.host << ":" << port << " (POST /complete, /v1/completions)\n";
    err.flush();
    server.listen();
    return kExitOk;
}

int exit_code_for(const Error& e) {
    return e.kind() == "ConfigError" ? kExitUsage : kExitData;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scan code corpora for sensitive strings, probe models for disclosure, and compare releases.",
                 "leakscope"};
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "TOML config file; flags override it");
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1, 1);

    ScanOpts scan;
    auto* s = app.add_subcommand("scan", "Scan corpus shards and write a ScanSummary plus sensitive index");
    s->add_option("--corpus", scan.corpus, "Shard paths or globs (gzip JSON lines)")->required()->delimiter(',');
    s->add_option("--patterns", scan.patterns, "Pattern table JSON (default: built-in)");
    s->add_option("--out", scan.out, "ScanSummary JSON path")->required();
    s->add_option("--index", scan.index, "Sensitive index path (default: <out dir>/sensitive/index.json)");
    s->add_option("--label", scan.label, "Release label");
    s->add_option("--threads", scan.threads, "OpenMP threads (0 = default)");
    s->add_flag("--serial", scan.serial, "Use the serial reference kernel");
    s->add_option("--batch-lines", scan.batch_lines, "Lines per parallel batch")->check(CLI::PositiveNumber);

    MaskOpts mask;
    auto* m = app.add_subcommand("mask", "Build a masked assessment dataset from a corpus");
    m->add_option("--corpus", mask.corpus, "Shard paths or globs")->required()->delimiter(',');
    m->add_option("--patterns", mask.patterns, "Pattern table JSON (default: built-in)");
    m->add_option("--out", mask.out, "Output directory")->required();
    m->add_option("--label", mask.label, "Release label");
    m->add_option("--max-per-category", mask.max_per_category, "Case cap per category (0 = no cap)");
    m->add_option("--seed", mask.seed, "Sampling seed");
    m->add_option("--mask-token", mask.mask_token, "Placeholder for masked spans");

    PromptsOpts pr;
    auto* p = app.add_subcommand("prompts", "Render malicious and unintentional prompt suites");
    p->add_option("--dataset", pr.dataset, "Assessment dataset directory (from mask)");
    p->add_option("--strategies", pr.strategies, "Subset of PS_1..PS_6")->delimiter(',');
    p->add_option("--templates", pr.templates, "Template set JSON (default: built-in)");
    p->add_option("--benchmark", pr.benchmarks, "Benchmark file as TAG=PATH (repeatable)");
    p->add_option("--unit", pr.unit, "Number of UNIT prompts");
    p->add_option("--object", pr.object, "Number of OBJECT prompts");
    p->add_option("--seed", pr.seed, "Generator seed");
    p->add_option("--index", pr.index, "Sensitive index; drops prompts that already contain a surface");
    p->add_option("--out", pr.out, "Prompt cases (gzip JSON lines)")->required();

    ProbeOpts pb;
    auto* b = app.add_subcommand("probe", "Collect k attempts per prompt from an endpoint");
    b->add_option("--prompts", pb.prompts, "Prompt cases file")->required();
    b->add_option("--out", pb.out, "Run directory")->required();
    b->add_option("--endpoint", pb.endpoint.url, "'oracle:' or http://host:port/path");
    b->add_option("--adapter", pb.endpoint.adapter, "Wire format: native|openai");
    b->add_option("--model", pb.endpoint.model, "Model name sent to the endpoint");
    b->add_option("--attempts", pb.endpoint.attempts, "Attempts per prompt (max k)");
    b->add_option("--temperature", pb.endpoint.sampling.temperature);
    b->add_option("--top-p", pb.endpoint.sampling.top_p);
    b->add_option("--max-tokens", pb.endpoint.sampling.max_new_tokens);
    b->add_option("--timeout-ms", pb.timeout_ms);
    b->add_option("--max-retries", pb.endpoint.max_retries);
    b->add_option("--max-in-flight", pb.endpoint.max_in_flight);
    b->add_option("--backoff-base-ms", pb.backoff_base_ms);
    b->add_option("--backoff-cap-ms", pb.backoff_cap_ms);
    b->add_option("--oracle-corpus", pb.oracle_corpus, "Corpus the oracle memorizes")->delimiter(',');
    b->add_option("--oracle-window", pb.oracle_window, "Oracle context window W in bytes");
    b->add_option("--oracle-default-output", pb.oracle_default_output, "Oracle output for unseen contexts");

    ScoreOpts sc;
    auto* c = app.add_subcommand("score", "Judge attempts and aggregate pass@k into a DisclosureReport");
    c->add_option("--attempts", sc.attempts, "Attempts file from probe")->required();
    c->add_option("--prompts", sc.prompts, "Prompt cases (default: from the probe manifest)");
    c->add_option("--index", sc.index, "Sensitive index (default: from the probe manifest)");
    c->add_option("--dataset", sc.dataset, "Dataset directory with ground truth (default: from the probe manifest)");
    c->add_option("--k", sc.k, "k values")->delimiter(',');
    c->add_option("--label", sc.label, "Run label");
    c->add_option("--out", sc.out, "Report JSON (default: stdout)");
    c->add_option("--csv", sc.csv, "Also write a CSV export");
    c->add_option("--markdown", sc.markdown, "Also write a markdown summary");

    DiffOpts df;
    auto* d = app.add_subcommand("diff", "Compare two scan summaries or two disclosure reports");
    d->add_option("--before", df.before, "Earlier release")->required()->check(CLI::ExistingFile);
    d->add_option("--after", df.after, "Later release")->required()->check(CLI::ExistingFile);
    d->add_option("--format", df.format, "json|markdown");
    d->add_option("--out", df.out, "Output path (default: stdout)");

    GateOpts gt;
    auto* g = app.add_subcommand("gate", "Exit 3 when a later release regresses");
    g->add_option("--before", gt.before, "Earlier release")->required()->check(CLI::ExistingFile);
    g->add_option("--after", gt.after, "Later release")->required()->check(CLI::ExistingFile);
    g->add_option("--max-increase", gt.max_increase,
                  "Allowed rise: absolute rate for reports, relative growth for scans")
        ->check(CLI::NonNegativeNumber);
    g->add_option("--k", gt.k, "Only these k values")->delimiter(',');
    g->add_option("--risk-type", gt.risk_type, "malicious|unintentional");
    g->add_flag("--fail-on-new-cells", gt.fail_on_new_cells, "Cells absent before count as regressions");
    g->add_option("--out", gt.out, "Gate result JSON (default: stdout)");

    ServeOpts sv;
    auto* o = app.add_subcommand("oracle-serve", "Serve the memorizing oracle over HTTP");
    o->add_option("--corpus", sv.corpus, "Corpus the oracle memorizes")->required()->delimiter(',');
    o->add_option("--window", sv.window, "Context window W in bytes");
    o->add_option("--default-output", sv.default_output, "Output for unseen contexts");
    o->add_option("--host", sv.host);
    o->add_option("--port", sv.port, "0 picks a free port");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (s->parsed()) return cmd_scan(scan, *s, out, err);
        if (m->parsed()) return cmd_mask(mask, *m, out, err);
        if (p->parsed()) return cmd_prompts(pr, *p, out, err);
        if (b->parsed()) return cmd_probe(pb, *b, out, err);
        if (c->parsed()) return cmd_score(sc, *c, out, err);
        if (d->parsed()) return cmd_diff(df, *d, out, err);
        if (g->parsed()) return cmd_gate(gt, *g, out, err);
        if (o->parsed()) return cmd_serve(sv, *o, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace leakscope
