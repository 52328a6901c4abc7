// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "leakscope/io.hpp"
#include "leakscope/oracle_lm.hpp"
#include "leakscope/prompt_factory.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace leakscope {

struct SamplingParams {
    double temperature = 0.8;
    double top_p = 0.95;
    int max_new_tokens = 256;

    friend bool operator==(const SamplingParams&, const SamplingParams&) = default;
};

struct EndpointConfig {
    std::string url = "oracle:";  // "oracle:" selects the in-process oracle
    std::string model = "oracle";
    std::string adapter = "native";  // native | openai
    SamplingParams sampling;
    int attempts = 10;  // k
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    int max_in_flight = 4;
    std::chrono::milliseconds backoff_base{200};
    std::chrono::milliseconds backoff_cap{10000};

    /// Throws ConfigError.
    void validate() const;
    Json to_json() const;
    static EndpointConfig from_json(const Json& j);
    /// SHA-256 of the canonical JSON form.
    std::string config_hash() const;
};

struct CompletionRequest {
    std::string prompt;
    std::string model;
    SamplingParams sampling;
};

/// Model client. Implementations throw EndpointError or TimeoutError and
/// must be callable from several threads at once.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
    virtual std::string identity() const = 0;
};

class OracleClient final : public CompletionClient {
public:
    explicit OracleClient(std::shared_ptr<const Oracle> oracle) : oracle_(std::move(oracle)) {}
    std::string complete(const CompletionRequest& request) override;
    std::string identity() const override;

private:
    std::shared_ptr<const Oracle> oracle_;
};

/// HTTP POST client for the completion wire contract.
class HttpCompletionClient final : public CompletionClient {
public:
    explicit HttpCompletionClient(EndpointConfig config);
    std::string complete(const CompletionRequest& request) override;
    std::string identity() const override { return config_.url; }

    /// Environment variable consulted for a bearer token.
    static constexpr const char* kApiKeyEnv = "LEAKSCOPE_API_KEY";

private:
    EndpointConfig config_;
    std::string origin_;  // scheme://host:port
    std::string path_;
};

struct CompletionOutcome {
    std::string text;
    int retries = 0;
};

/// Calls the client, retrying failures with capped exponential backoff.
/// Throws the last EndpointError/TimeoutError once retries are exhausted.
CompletionOutcome complete(CompletionClient& client, const EndpointConfig& endpoint,
                           std::string_view prompt_text);

struct ProbeAttempt {
    std::string prompt_id;
    int attempt_index = 0;
    std::string output_text;
    bool ok = true;
    std::string error;  // "EndpointError: ..." when !ok
    int retries = 0;
    double latency_ms = 0;
    std::string endpoint;
    std::string model;
    SamplingParams sampling;
    std::string prompt_sha256;
    std::string timestamp;

    Json to_json() const;
    static ProbeAttempt from_json(const Json& j);
};

/// Exactly k attempts per case, ordered by (case order, attempt_index).
/// Never throws for endpoint failures; they become failed attempts.
std::vector<ProbeAttempt> run_probes(const std::vector<PromptCase>& cases,
                                     const EndpointConfig& endpoint, CompletionClient& client);

void write_attempts(const std::vector<ProbeAttempt>& attempts, const std::filesystem::path& path);
std::vector<ProbeAttempt> read_attempts(const std::filesystem::path& path);

/// Builds the client the URL asks for. "oracle:" needs an oracle.
std::unique_ptr<CompletionClient> make_client(const EndpointConfig& endpoint,
                                              std::shared_ptr<const Oracle> oracle = nullptr);

/// Loopback server speaking the wire contract on POST /complete (native)
/// and POST /v1/completions (openai-style).
class OracleServer {
public:
    explicit OracleServer(std::shared_ptr<const Oracle> oracle);
    ~OracleServer();
    OracleServer(const OracleServer&) = delete;
    OracleServer& operator=(const OracleServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void start_background();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace leakscope
