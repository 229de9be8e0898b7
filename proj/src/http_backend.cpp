#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "rulechain/backend.hpp"

namespace rulechain {

std::string Endpoint::origin() const {
    return scheme + "://" + host + ":" + std::to_string(port);
}

Endpoint parse_endpoint(std::string_view url) {
    Endpoint ep;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw invalid_input("endpoint is not an absolute URL: " + std::string(url));
    }
    ep.scheme = std::string(url.substr(0, scheme_end));
    if (ep.scheme != "http" && ep.scheme != "https") {
        throw invalid_input("endpoint scheme must be http or https: " + std::string(url));
    }
    auto rest = url.substr(scheme_end + 3);
    auto slash = std::find(rest.begin(), rest.end(), '/');
    std::string_view authority(rest.data(), static_cast<std::size_t>(slash - rest.begin()));
    if (slash != rest.end()) {
        ep.base_path = std::string(slash, rest.end());
        while (!ep.base_path.empty() && ep.base_path.back() == '/') {
            ep.base_path.pop_back();
        }
    }
    auto colon = authority.rfind(':');
    if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
        ep.host = std::string(authority.substr(0, colon));
        auto port_text = std::string(authority.substr(colon + 1));
        char* end = nullptr;
        long port = std::strtol(port_text.c_str(), &end, 10);
        if (port_text.empty() || *end != '\0' || port < 1 || port > 65535) {
            throw invalid_input("endpoint has an invalid port: " + std::string(url));
        }
        ep.port = static_cast<int>(port);
    } else {
        ep.host = std::string(authority);
        ep.port = ep.scheme == "https" ? 443 : 80;
    }
    if (ep.host.empty()) {
        throw invalid_input("endpoint has no host: " + std::string(url));
    }
    return ep;
}

HttpBackend::HttpBackend(HttpSettings settings)
    : settings_(std::move(settings)), endpoint_(parse_endpoint(settings_.endpoint)) {
    if (settings_.retries < 0) {
        throw invalid_input("http backend: retries must be >= 0");
    }
    if (settings_.max_connections < 1) {
        throw invalid_input("http backend: max_connections must be >= 1");
    }
    if (settings_.api_key) {
        api_key_ = *settings_.api_key;
    } else if (const char* env = std::getenv("RULECHAIN_API_KEY")) {
        api_key_ = env;
    }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (endpoint_.scheme == "https") {
        throw invalid_input("http backend: built without TLS support, cannot use " +
                            settings_.endpoint);
    }
#endif
}

void HttpBackend::acquire() const {
    std::unique_lock lock(slots_mutex_);
    slots_cv_.wait(lock, [this] { return in_flight_ < settings_.max_connections; });
    ++in_flight_;
}

void HttpBackend::release() const {
    {
        std::lock_guard lock(slots_mutex_);
        --in_flight_;
    }
    slots_cv_.notify_one();
}

std::string HttpBackend::complete(const CompletionRequest& request) const {
    request.validate();
    const std::string body = build_chat_request(settings_.model, request).dump();
    const std::string path = endpoint_.base_path + "/chat/completions";

    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }

    acquire();
    struct Release {
        const HttpBackend* self;
        ~Release() { self->release(); }
    } guard{this};

    httplib::Client client(endpoint_.origin());
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(settings_.timeout);
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(settings_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    std::string last_failure;
    auto backoff = settings_.initial_backoff;
    for (int attempt = 0; attempt <= settings_.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        auto result = client.Post(path, headers, body, "application/json");
        if (!result) {
            last_failure = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status >= 200 && result->status < 300) {
            return parse_chat_response(result->body);
        }
        last_failure = "HTTP status " + std::to_string(result->status);
        if (result->status >= 400 && result->status < 500 && result->status != 408 &&
            result->status != 429) {
            break;
        }
    }
    throw Error(ErrorKind::backend_unavailable,
                "chat completions at " + settings_.endpoint + " failed: " + last_failure);
}

std::string HttpBackend::describe() const {
    return "http(" + settings_.endpoint + ", model=" + settings_.model + ")";
}

} // namespace rulechain
