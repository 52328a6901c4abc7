// SPDX-License-Identifier: Apache-2.0
#include "leakscope/probe_runner.hpp"

#include "leakscope/errors.hpp"
#include "leakscope/util.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace leakscope {

namespace {

Json sampling_json(const SamplingParams& s) {
    return Json{{"temperature", s.temperature},
                {"top_p", s.top_p},
                {"max_new_tokens", s.max_new_tokens}};
}

SamplingParams sampling_from_json(const Json& j) {
    SamplingParams s;
    s.temperature = j.value("temperature", s.temperature);
    s.top_p = j.value("top_p", s.top_p);
    s.max_new_tokens = j.value("max_new_tokens", s.max_new_tokens);
    return s;
}

std::string handle_completion_body(const Oracle& oracle, const std::string& body, bool openai) {
    const auto req = nlohmann::json::parse(body);
    const auto prompt = req.at("prompt").get<std::string>();
    const auto max_tokens = req.value("max_tokens", 256);
    const std::string text =
        oracle_complete(oracle, prompt, static_cast<std::size_t>(std::max(max_tokens, 0)));
    if (openai)
        return nlohmann::json{{"object", "text_completion"},
                              {"model", req.value("model", std::string("oracle"))},
                              {"choices", {{{"index", 0}, {"text", text}}}}}
            .dump();
    return nlohmann::json{{"text", text}}.dump();
}

}  // namespace

void EndpointConfig::validate() const {
    if (attempts < 1) throw ConfigError("attempts (k) must be >= 1");
    if (sampling.temperature < 0) throw ConfigError("temperature must be >= 0");
    if (sampling.top_p <= 0 || sampling.top_p > 1) throw ConfigError("top_p must be in (0, 1]");
    if (sampling.max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
    if (adapter != "native" && adapter != "openai") throw ConfigError("unknown adapter " + adapter);
    if (url != "oracle:" && url.rfind("http://", 0) != 0)
        throw ConfigError("endpoint url must be 'oracle:' or http://...; got " + url);
}

Json EndpointConfig::to_json() const {
    return Json{{"url", url},
                {"model", model},
                {"adapter", adapter},
                {"sampling", sampling_json(sampling)},
                {"attempts", attempts},
                {"timeout_ms", timeout.count()},
                {"max_retries", max_retries},
                {"max_in_flight", max_in_flight},
                {"backoff_base_ms", backoff_base.count()},
                {"backoff_cap_ms", backoff_cap.count()}};
}

EndpointConfig EndpointConfig::from_json(const Json& j) {
    try {
        EndpointConfig c;
        c.url = j.value("url", c.url);
        c.model = j.value("model", c.model);
        c.adapter = j.value("adapter", c.adapter);
        if (j.contains("sampling")) c.sampling = sampling_from_json(j.at("sampling"));
        c.attempts = j.value("attempts", c.attempts);
        c.timeout = std::chrono::milliseconds(j.value("timeout_ms", c.timeout.count()));
        c.max_retries = j.value("max_retries", c.max_retries);
        c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
        c.backoff_base = std::chrono::milliseconds(j.value("backoff_base_ms", c.backoff_base.count()));
        c.backoff_cap = std::chrono::milliseconds(j.value("backoff_cap_ms", c.backoff_cap.count()));
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed endpoint config: ") + e.what());
    }
}

std::string EndpointConfig::config_hash() const { return sha256_hex(to_json().dump()); }

std::string OracleClient::complete(const CompletionRequest& request) {
    return oracle_complete(*oracle_, request.prompt,
                           static_cast<std::size_t>(request.sampling.max_new_tokens));
}

std::string OracleClient::identity() const {
    return "oracle:W=" + std::to_string(oracle_->window());
}

HttpCompletionClient::HttpCompletionClient(EndpointConfig config) : config_(std::move(config)) {
    const std::string& url = config_.url;
    if (url.rfind("http://", 0) != 0) throw ConfigError("only http:// endpoints are supported: " + url);
    const auto host_start = std::string("http://").size();
    const auto slash = url.find('/', host_start);
    origin_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "/complete" : url.substr(slash);
}

std::string HttpCompletionClient::complete(const CompletionRequest& request) {
    httplib::Client cli(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (const char* key = std::getenv(kApiKeyEnv); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    nlohmann::json body = {{"prompt", request.prompt},
                           {"temperature", request.sampling.temperature},
                           {"top_p", request.sampling.top_p},
                           {"max_tokens", request.sampling.max_new_tokens}};
    if (config_.adapter == "openai") body["model"] = request.model;

    const auto started = std::chrono::steady_clock::now();
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        const auto elapsed = std::chrono::steady_clock::now() - started;
        if (err == httplib::Error::ConnectionTimeout ||
            (err == httplib::Error::Read && elapsed >= config_.timeout))
            throw TimeoutError(config_.url + ": " + httplib::to_string(err));
        throw EndpointError(config_.url + ": " + httplib::to_string(err));
    }
    if (res->status != 200)
        throw EndpointError(config_.url + ": HTTP " + std::to_string(res->status));
    try {
        const auto j = nlohmann::json::parse(res->body);
        if (config_.adapter == "openai") return j.at("choices").at(0).at("text").get<std::string>();
        return j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw EndpointError(config_.url + ": bad response body: " + e.what());
    }
}

CompletionOutcome complete(CompletionClient& client, const EndpointConfig& endpoint,
                           std::string_view prompt_text) {
    CompletionRequest req{std::string(prompt_text), endpoint.model, endpoint.sampling};
    auto delay = endpoint.backoff_base;
    for (int retry = 0;; ++retry) {
        try {
            return {client.complete(req), retry};
        } catch (const EndpointError&) {
            if (retry >= endpoint.max_retries) throw;
        } catch (const TimeoutError&) {
            if (retry >= endpoint.max_retries) throw;
        }
        std::this_thread::sleep_for(delay);
        delay = std::min(delay * 2, endpoint.backoff_cap);
    }
}

Json ProbeAttempt::to_json() const {
    Json j = {{"prompt_id", prompt_id},
              {"attempt_index", attempt_index},
              {"output_text", output_text},
              {"ok", ok}};
    if (!ok) j["error"] = error;
    j["retries"] = retries;
    j["latency_ms"] = latency_ms;
    j["endpoint"] = endpoint;
    j["model"] = model;
    j["sampling"] = sampling_json(sampling);
    j["prompt_sha256"] = prompt_sha256;
    j["timestamp"] = timestamp;
    return j;
}

ProbeAttempt ProbeAttempt::from_json(const Json& j) {
    try {
        ProbeAttempt a;
        a.prompt_id = j.at("prompt_id").get<std::string>();
        a.attempt_index = j.at("attempt_index").get<int>();
        a.output_text = j.at("output_text").get<std::string>();
        a.ok = j.at("ok").get<bool>();
        a.error = j.value("error", std::string{});
        a.retries = j.value("retries", 0);
        a.latency_ms = j.value("latency_ms", 0.0);
        a.endpoint = j.value("endpoint", std::string{});
        a.model = j.value("model", std::string{});
        if (j.contains("sampling")) a.sampling = sampling_from_json(j.at("sampling"));
        a.prompt_sha256 = j.value("prompt_sha256", std::string{});
        a.timestamp = j.value("timestamp", std::string{});
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(std::string("malformed probe attempt: ") + e.what());
    }
}

std::vector<ProbeAttempt> run_probes(const std::vector<PromptCase>& cases,
                                     const EndpointConfig& endpoint, CompletionClient& client) {
    endpoint.validate();
    if (cases.empty()) throw ConfigError("no prompt cases to probe");

    const std::size_t k = static_cast<std::size_t>(endpoint.attempts);
    const std::size_t total = cases.size() * k;
    std::vector<ProbeAttempt> out(total);
    std::vector<std::string> prompt_hashes(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) prompt_hashes[i] = sha256_hex(cases[i].prompt_text);
    const std::string identity = client.identity();

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < total;) {
            const auto& pc = cases[t / k];
            ProbeAttempt& a = out[t];
            a.prompt_id = pc.prompt_id;
            a.attempt_index = static_cast<int>(t % k);
            a.endpoint = identity;
            a.model = endpoint.model;
            a.sampling = endpoint.sampling;
            a.prompt_sha256 = prompt_hashes[t / k];
            a.timestamp = utc_timestamp();
            const auto started = std::chrono::steady_clock::now();
            try {
                auto res = complete(client, endpoint, pc.prompt_text);
                a.output_text = std::move(res.text);
                a.retries = res.retries;
            } catch (const Error& e) {
                a.ok = false;
                a.error = e.what();
                a.retries = endpoint.max_retries;
            } catch (const std::exception& e) {
                a.ok = false;
                a.error = std::string("EndpointError: ") + e.what();
                a.retries = endpoint.max_retries;
            }
            a.latency_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - started)
                               .count();
        }
    };

    const auto n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(endpoint.max_in_flight), total);
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    pool.clear();  // joins
    return out;
}

void write_attempts(const std::vector<ProbeAttempt>& attempts, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    GzLineWriter w(path, FileMode::Restricted);
    for (const auto& a : attempts) w.write_json(a.to_json());
    w.close();
}

std::vector<ProbeAttempt> read_attempts(const std::filesystem::path& path) {
    std::vector<ProbeAttempt> out;
    for (const auto& j : read_jsonl(path)) out.push_back(ProbeAttempt::from_json(j));
    return out;
}

std::unique_ptr<CompletionClient> make_client(const EndpointConfig& endpoint,
                                              std::shared_ptr<const Oracle> oracle) {
    endpoint.validate();
    if (endpoint.url == "oracle:") {
        if (!oracle) throw ConfigError("endpoint 'oracle:' needs an oracle corpus");
        return std::make_unique<OracleClient>(std::move(oracle));
    }
    return std::make_unique<HttpCompletionClient>(endpoint);
}

struct OracleServer::Impl {
    std::shared_ptr<const Oracle> oracle;
    httplib::Server server;
    std::thread thread;
};

OracleServer::OracleServer(std::shared_ptr<const Oracle> oracle) : impl_(std::make_unique<Impl>()) {
    impl_->oracle = std::move(oracle);
    const auto handler = [this](bool openai) {
        return [this, openai](const httplib::Request& req, httplib::Response& res) {
            try {
                res.set_content(handle_completion_body(*impl_->oracle, req.body, openai),
                                "application/json");
            } catch (const nlohmann::json::exception& e) {
                res.status = 400;
                res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
            }
        };
    };
    impl_->server.Post("/complete", handler(false));
    impl_->server.Post("/v1/completions", handler(true));
}

OracleServer::~OracleServer() { stop(); }

int OracleServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw IoError("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port))
        throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void OracleServer::listen() { impl_->server.listen_after_bind(); }

void OracleServer::start_background() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void OracleServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace leakscope
