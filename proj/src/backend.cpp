#include "rulechain/backend.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace rulechain {

void CompletionRequest::validate() const {
    if (max_tokens < 1) {
        throw invalid_input("completion request: max_tokens must be >= 1");
    }
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
        throw invalid_input("completion request: temperature must be finite and >= 0");
    }
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

MockBackend::MockBackend(MockSettings settings) : settings_(std::move(settings)) {}

std::string MockBackend::complete(const CompletionRequest& request) const {
    request.validate();
    calls_.fetch_add(1);
    if (auto it = settings_.fixtures.find(request.prompt); it != settings_.fixtures.end()) {
        return it->second;
    }
    if (!settings_.fallback) {
        throw Error(ErrorKind::fixture_missing,
                    "mock backend: no fixture for prompt: " + request.prompt.substr(0, 120));
    }
    std::uint64_t h = fnv1a64(request.prompt);
    if (request.seed) {
        h ^= fnv1a64(std::to_string(*request.seed)) * 0x9e3779b97f4a7c15ULL;
    }
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(h));
    return std::string("mock completion ") + digest;
}

std::string MockBackend::describe() const {
    return "mock(" + std::to_string(settings_.fixtures.size()) + " fixtures" +
           (settings_.fallback ? ", fallback" : "") + ")";
}

std::shared_ptr<const Backend> make_backend(const BackendKind& kind) {
    if (const auto* mock = std::get_if<MockSettings>(&kind)) {
        return std::make_shared<MockBackend>(*mock);
    }
    return std::make_shared<HttpBackend>(std::get<HttpSettings>(kind));
}

Json build_chat_request(std::string_view model, const CompletionRequest& request) {
    Json body;
    body["model"] = std::string(model);
    Json message;
    message["role"] = "user";
    message["content"] = request.prompt;
    body["messages"] = Json::array({message});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (request.seed) {
        body["seed"] = *request.seed;
    }
    return body;
}

std::string parse_chat_response(std::string_view body) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::protocol, std::string("chat response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
        j["choices"].empty()) {
        throw Error(ErrorKind::protocol, "chat response has no choices");
    }
    const auto& choice = j["choices"][0];
    if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object() ||
        !choice["message"].contains("content") || !choice["message"]["content"].is_string()) {
        throw Error(ErrorKind::protocol, "chat response choice lacks message.content");
    }
    return choice["message"]["content"].get<std::string>();
}

std::map<std::string, std::string, std::less<>> load_fixtures(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read fixture file " + path);
    }
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::parse, "fixture file " + path + ": " + e.what());
    }
    if (!j.is_object()) {
        throw Error(ErrorKind::parse, "fixture file " + path + ": expected a JSON object");
    }
    std::map<std::string, std::string, std::less<>> fixtures;
    for (const auto& [prompt, response] : j.items()) {
        if (!response.is_string()) {
            throw Error(ErrorKind::parse, "fixture file " + path + ": non-string response");
        }
        fixtures.emplace(prompt, response.get<std::string>());
    }
    return fixtures;
}

} // namespace rulechain
