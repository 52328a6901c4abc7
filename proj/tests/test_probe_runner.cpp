// SPDX-License-Identifier: Apache-2.0
#include "leakscope/errors.hpp"
#include "leakscope/probe_runner.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <atomic>
#include <mutex>

using namespace leakscope;
using namespace std::chrono_literals;

namespace {

std::shared_ptr<const Oracle> tiny_oracle() {
    CorpusRecord r;
    r.id = "r0";
    r.text = "prompt number 1 -> first answer\nprompt number 2 -> second answer\n";
    r.language = Language::Python;
    std::vector<CorpusRecord> v{r};
    return std::make_shared<const Oracle>(build_oracle(v, 8));
}

std::vector<PromptCase> cases(int n) {
    std::vector<PromptCase> v;
    for (int i = 0; i < n; ++i) {
        PromptCase p;
        p.prompt_id = "u:T:" + std::to_string(i);
        p.risk_type = RiskType::Unintentional;
        p.dataset_tag = "UNIT";
        p.prompt_text = "prompt number " + std::to_string(i) + " -> ";
        v.push_back(std::move(p));
    }
    return v;
}

EndpointConfig fast_config(int k) {
    EndpointConfig e;
    e.attempts = k;
    e.backoff_base = 1ms;
    e.backoff_cap = 2ms;
    e.sampling.temperature = 0;
    return e;
}

/// Fails the first `failures` calls, then answers "ok".
class FlakyClient final : public CompletionClient {
public:
    explicit FlakyClient(int failures) : failures_(failures) {}
    std::string complete(const CompletionRequest&) override {
        if (calls_.fetch_add(1) < failures_) throw EndpointError("transient");
        return "ok";
    }
    std::string identity() const override { return "flaky"; }
    int calls() const { return calls_.load(); }

private:
    int failures_;
    std::atomic<int> calls_{0};
};

}  // namespace

TEST_CASE("config validation") {
    EndpointConfig e;
    CHECK_NOTHROW(e.validate());
    e.attempts = 0;
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = EndpointConfig{};
    e.sampling.top_p = 0;
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = EndpointConfig{};
    e.adapter = "grpc";
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = EndpointConfig{};
    e.url = "https://example.com";
    CHECK_THROWS_AS(e.validate(), ConfigError);
}

TEST_CASE("config JSON round-trips and hashes stably") {
    EndpointConfig e;
    e.model = "m";
    e.attempts = 5;
    e.sampling.top_p = 0.5;
    const auto back = EndpointConfig::from_json(e.to_json());
    CHECK(back.to_json() == e.to_json());
    CHECK(back.config_hash() == e.config_hash());
    e.attempts = 6;
    CHECK(back.config_hash() != e.config_hash());
}

TEST_CASE("k attempts per case in case order") {
    OracleClient client(tiny_oracle());
    const auto out = run_probes(cases(3), fast_config(10), client);
    REQUIRE(out.size() == 30);
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].prompt_id == "u:T:" + std::to_string(i / 10));
        CHECK(out[i].attempt_index == static_cast<int>(i % 10));
        CHECK(out[i].ok);
    }
    CHECK(out[0].output_text == "    pass\n");
    CHECK(out[10].output_text == "first answer\nprompt number 2 -> second answer\n");
}

TEST_CASE("deterministic endpoint reproduces outputs at any concurrency") {
    OracleClient client(tiny_oracle());
    auto cfg = fast_config(4);
    cfg.max_in_flight = 1;
    const auto a = run_probes(cases(3), cfg, client);
    cfg.max_in_flight = 8;
    const auto b = run_probes(cases(3), cfg, client);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].prompt_id == b[i].prompt_id);
        CHECK(a[i].attempt_index == b[i].attempt_index);
        CHECK(a[i].output_text == b[i].output_text);
        CHECK(a[i].prompt_sha256 == b[i].prompt_sha256);
    }
}

TEST_CASE("transient failures are retried") {
    FlakyClient client(2);
    auto cfg = fast_config(1);
    cfg.max_retries = 3;
    const auto out = run_probes(cases(1), cfg, client);
    REQUIRE(out.size() == 1);
    CHECK(out[0].ok);
    CHECK(out[0].retries == 2);
    CHECK(out[0].output_text == "ok");
    CHECK(client.calls() == 3);
}

TEST_CASE("exhausted retries become a failed attempt") {
    FlakyClient client(100);
    auto cfg = fast_config(2);
    cfg.max_retries = 2;
    const auto out = run_probes(cases(1), cfg, client);
    REQUIRE(out.size() == 2);
    for (const auto& a : out) {
        CHECK_FALSE(a.ok);
        CHECK(a.error.rfind("EndpointError", 0) == 0);
        CHECK(a.retries == 2);
    }
    CHECK(client.calls() == 6);
    CHECK_THROWS_AS(complete(client, cfg, "x"), EndpointError);
}

TEST_CASE("unreachable endpoint yields failed attempts, not exceptions") {
    auto cfg = fast_config(2);
    cfg.url = "http://127.0.0.1:1/complete";
    cfg.max_retries = 1;
    cfg.timeout = 500ms;
    HttpCompletionClient client(cfg);
    const auto out = run_probes(cases(1), cfg, client);
    REQUIRE(out.size() == 2);
    CHECK_FALSE(out[0].ok);
    CHECK_FALSE(out[1].ok);
}

TEST_CASE("oracle client needs an oracle") {
    CHECK_THROWS_AS(make_client(EndpointConfig{}), ConfigError);
    CHECK(make_client(EndpointConfig{}, tiny_oracle())->identity() == "oracle:W=8");
}

TEST_CASE("HTTP loopback matches the in-process oracle for both adapters") {
    const auto oracle = tiny_oracle();
    OracleServer server(oracle);
    const int port = server.bind("127.0.0.1", 0);
    server.start_background();

    OracleClient local(oracle);
    const auto expected = run_probes(cases(3), fast_config(2), local);
    for (const char* adapter : {"native", "openai"}) {
        auto cfg = fast_config(2);
        cfg.adapter = adapter;
        cfg.url = "http://127.0.0.1:" + std::to_string(port) +
                  (std::string(adapter) == "openai" ? "/v1/completions" : "/complete");
        auto client = make_client(cfg);
        const auto got = run_probes(cases(3), cfg, *client);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].ok);
            CHECK(got[i].output_text == expected[i].output_text);
        }
    }
    server.stop();
}

TEST_CASE("attempts persist to a restricted file and read back") {
    OracleClient client(tiny_oracle());
    const auto out = run_probes(cases(2), fast_config(3), client);
    testing::TempDir dir;
    write_attempts(out, dir / "a" / "attempts.jsonl.gz");
    const auto back = read_attempts(dir / "a" / "attempts.jsonl.gz");
    REQUIRE(back.size() == out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(back[i].to_json() == out[i].to_json());
    }
    CHECK_THROWS_AS(run_probes({}, fast_config(1), client), ConfigError);
}
