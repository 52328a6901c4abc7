// SPDX-License-Identifier: Apache-2.0
#include "leakscope/cli.hpp"
#include "leakscope/io.hpp"
#include "leakscope/release_diff.hpp"
#include "leakscope/synth.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <sstream>

using namespace leakscope;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "leakscope");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string s(const std::filesystem::path& p) { return p.string(); }

std::string join(const std::vector<std::filesystem::path>& ps) {
    std::string out;
    for (const auto& p : ps) out += (out.empty() ? "" : ",") + p.string();
    return out;
}

/// A small corpus written to disk, shared by the cases below.
struct Fixture {
    testing::TempDir dir;
    SynthPaths paths;
    std::string corpus;

    explicit Fixture(std::uint64_t seed = 1, std::size_t emails = 30) {
        SynthConfig c;
        c.records = 400;
        c.emails = emails;
        c.phones = 16;
        c.secrets = 9;
        c.other_language_records = 10;
        c.seed = seed;
        paths = write_corpus(generate_corpus(c), dir / "corpus", 2);
        corpus = join(paths.shards);
    }
};

}  // namespace

TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"scan"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("end-to-end pipeline over the oracle") {
    Fixture f;
    const auto w = f.dir.path();

    auto r = run({"scan", "--corpus", f.corpus, "--out", s(w / "scan" / "summary.json"), "--label", "r1"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto summary = ScanSummary::from_json(read_json_file(w / "scan" / "summary.json"));
    CHECK(summary.totals.unique_match_total == PerCategory<std::uint64_t>{30, 16, 9});
    CHECK(std::filesystem::exists(w / "scan" / "sensitive" / "index.json"));
    const auto manifest = read_json_file(w / "scan" / "summary.json.manifest.json");
    CHECK(manifest.contains("options"));
    CHECK(manifest.dump().find(s(f.paths.shards[0])) != std::string::npos);

    r = run({"mask", "--corpus", f.corpus, "--out", s(w / "ds"), "--max-per-category", "0", "--seed", "3"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    CHECK(std::filesystem::exists(w / "ds" / "manifest.json"));

    r = run({"prompts", "--dataset", s(w / "ds"), "--unit", "5", "--object", "5", "--benchmark",
             std::string("MBPP=") + LEAKSCOPE_DATA_DIR + "/benchmarks/mbpp_sample.jsonl", "--index",
             s(w / "scan" / "sensitive" / "index.json"), "--out", s(w / "prompts.jsonl.gz")});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);

    r = run({"probe", "--prompts", s(w / "prompts.jsonl.gz"), "--out", s(w / "run"), "--attempts", "5",
             "--oracle-corpus", f.corpus});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    CHECK(std::filesystem::exists(w / "run" / "sensitive" / "attempts.jsonl.gz"));

    r = run({"score", "--attempts", s(w / "run" / "sensitive" / "attempts.jsonl.gz"), "--k", "1,5",
             "--out", s(w / "report.json"), "--markdown", s(w / "report.md")});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto report = DisclosureReport::from_json(read_json_file(w / "report.json"));
    CellKey ps3;
    ps3.strategy = "PS_3";
    CHECK(report.rate(ps3, 1).value_or(-1) == 1.0);
    CellKey ps1;
    ps1.strategy = "PS_1";
    CHECK(report.rate(ps1, 5).value_or(-1) == 0.0);
    CellKey un;
    un.risk_type = RiskType::Unintentional;
    CHECK(report.rate(un, 5).value_or(-1) == 0.0);
    CHECK(report.find(un)->n_cases == 18);

    // Comparing a report with itself: no change, gate passes.
    r = run({"diff", "--before", s(w / "report.json"), "--after", s(w / "report.json"), "--format", "json"});
    REQUIRE(r.code == kExitOk);
    const auto delta = DisclosureDelta::from_json(Json::parse(r.out));
    for (const auto& c : delta.cells)
        for (const auto& k : c.by_k) CHECK(k.direction == Direction::Unchanged);
    r = run({"gate", "--before", s(w / "report.json"), "--after", s(w / "report.json")});
    CHECK(r.code == kExitOk);

    // Mixed document kinds are a data error.
    r = run({"diff", "--before", s(w / "report.json"), "--after", s(w / "scan" / "summary.json")});
    CHECK(r.code == kExitData);
    CHECK(r.err.find("SchemaMismatch") != std::string::npos);
}

TEST_CASE("scan diff and gate across two releases") {
    Fixture a(1, 30);
    Fixture b(2, 45);
    const auto w = a.dir.path();
    REQUIRE(run({"scan", "--corpus", a.corpus, "--out", s(w / "a.json"), "--label", "A"}).code == kExitOk);
    REQUIRE(run({"scan", "--corpus", b.corpus, "--out", s(w / "b.json"), "--label", "B", "--serial"}).code ==
            kExitOk);

    auto r = run({"diff", "--before", s(w / "a.json"), "--after", s(w / "b.json")});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("| all | email | 30 | 45 | +15 | +50.0% |") != std::string::npos);

    r = run({"gate", "--before", s(w / "a.json"), "--after", s(w / "b.json")});
    CHECK(r.code == kExitRegression);
    r = run({"gate", "--before", s(w / "b.json"), "--after", s(w / "b.json")});
    CHECK(r.code == kExitOk);
}

TEST_CASE("missing inputs are data errors") {
    testing::TempDir dir;
    auto r = run({"scan", "--corpus", s(dir / "none.jsonl.gz"), "--out", s(dir / "x.json")});
    CHECK(r.code == kExitData);
    r = run({"probe", "--prompts", s(dir / "none.gz"), "--out", s(dir / "run")});
    CHECK(r.code == kExitData);
}

TEST_CASE("invalid option values are usage errors") {
    Fixture f;
    const auto w = f.dir.path();
    REQUIRE(run({"mask", "--corpus", f.corpus, "--out", s(w / "ds")}).code == kExitOk);
    REQUIRE(run({"prompts", "--dataset", s(w / "ds"), "--out", s(w / "p.jsonl.gz")}).code == kExitOk);
    auto r = run({"probe", "--prompts", s(w / "p.jsonl.gz"), "--out", s(w / "run"), "--attempts", "0",
                  "--oracle-corpus", f.corpus});
    CHECK(r.code == kExitUsage);
    r = run({"prompts", "--dataset", s(w / "ds"), "--strategies", "PS_9", "--out", s(w / "q.jsonl.gz")});
    CHECK(r.code == kExitUsage);
}
