#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "rulechain/core.hpp"

namespace rulechain {

struct CompletionRequest {
    std::string prompt;
    int max_tokens = 512;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;

    // Throws invalid_input unless max_tokens >= 1 and temperature >= 0.
    void validate() const;
};

struct MockSettings {
    std::map<std::string, std::string, std::less<>> fixtures;
    // When false, a prompt without a fixture raises fixture_missing.
    bool fallback = true;
};

struct HttpSettings {
    std::string endpoint;  // absolute base URL, e.g. http://localhost:8000/v1
    std::string model;
    std::chrono::milliseconds timeout{60'000};
    int retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    int max_connections = 4;
    // Falls back to $RULECHAIN_API_KEY when unset.
    std::optional<std::string> api_key;
};

using BackendKind = std::variant<MockSettings, HttpSettings>;

/// Text completion service. Implementations must tolerate concurrent calls.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const CompletionRequest& request) const = 0;
    virtual std::string describe() const = 0;
};

/// Fixture table keyed by exact prompt text, with a hash-derived fallback.
class MockBackend final : public Backend {
public:
    explicit MockBackend(MockSettings settings);

    std::string complete(const CompletionRequest& request) const override;
    std::string describe() const override;

    std::size_t calls() const noexcept { return calls_.load(); }

private:
    MockSettings settings_;
    mutable std::atomic<std::size_t> calls_{0};
};

struct Endpoint {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string base_path;  // without trailing slash

    std::string origin() const;
};

// Throws invalid_input unless `url` is an absolute http(s) URL.
Endpoint parse_endpoint(std::string_view url);

/// OpenAI-compatible chat completions over HTTP POST {endpoint}/chat/completions.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpSettings settings);

    std::string complete(const CompletionRequest& request) const override;
    std::string describe() const override;

private:
    void acquire() const;
    void release() const;

    HttpSettings settings_;
    Endpoint endpoint_;
    std::string api_key_;
    mutable std::mutex slots_mutex_;
    mutable std::condition_variable slots_cv_;
    mutable int in_flight_ = 0;
};

std::shared_ptr<const Backend> make_backend(const BackendKind& kind);

/// {model, messages:[{role:"user", content}], temperature, max_tokens[, seed]}
Json build_chat_request(std::string_view model, const CompletionRequest& request);

// Returns choices[0].message.content; throws Error(protocol) otherwise.
std::string parse_chat_response(std::string_view body);

/// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view text);

// Reads a JSON object mapping prompt text to response text.
std::map<std::string, std::string, std::less<>> load_fixtures(const std::string& path);

} // namespace rulechain
