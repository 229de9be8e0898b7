#include "rulechain/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

namespace rulechain {

namespace {

Error config_error(const std::string& message) {
    return Error(ErrorKind::config, "config: " + message);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) {
        return p.string();
    }
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw config_error(std::string("field '") + key + "' has the wrong type");
    }
}

StageDecoding parse_decoding(const Json& j, StageDecoding fallback) {
    if (!j.is_object()) {
        throw config_error("decoding settings must be an object");
    }
    fallback.max_tokens = get_or(j, "max_tokens", fallback.max_tokens);
    fallback.temperature = get_or(j, "temperature", fallback.temperature);
    if (j.contains("seed") && !j.at("seed").is_null()) {
        fallback.seed = get_or<std::int64_t>(j, "seed", 0);
    }
    return fallback;
}

} // namespace

BackendKind parse_backend_kind(const Json& j, const std::string& base_dir) {
    if (!j.is_object() || !j.contains("kind")) {
        throw config_error("backend needs a 'kind' of mock or http");
    }
    const auto kind = get_or<std::string>(j, "kind", "");
    if (kind == "mock") {
        MockSettings mock;
        mock.fallback = get_or(j, "fallback", true);
        if (j.contains("fixtures")) {
            const auto& f = j.at("fixtures");
            if (f.is_string()) {
                try {
                    mock.fixtures = load_fixtures(resolve(base_dir, f.get<std::string>()));
                } catch (const Error& e) {
                    throw config_error(e.what());
                }
            } else if (f.is_object()) {
                for (const auto& [prompt, response] : f.items()) {
                    mock.fixtures.emplace(prompt, response.get<std::string>());
                }
            } else {
                throw config_error("mock 'fixtures' must be a path or an object");
            }
        }
        return mock;
    }
    if (kind == "http") {
        HttpSettings http;
        http.endpoint = get_or<std::string>(j, "endpoint", "");
        http.model = get_or<std::string>(j, "model", "default");
        http.timeout = std::chrono::milliseconds(get_or<long long>(j, "timeout_ms", 60'000));
        http.retries = get_or(j, "retries", 3);
        http.initial_backoff = std::chrono::milliseconds(get_or<long long>(j, "backoff_ms", 500));
        http.max_connections = get_or(j, "max_connections", 4);
        try {
            parse_endpoint(http.endpoint);
        } catch (const Error& e) {
            throw config_error(e.what());
        }
        if (http.retries < 0) {
            throw config_error("http 'retries' must be >= 0");
        }
        return http;
    }
    throw config_error("unknown backend kind '" + kind + "'");
}

void RunConfig::validate() const {
    if (parallel < 1) {
        throw config_error("parallel must be >= 1");
    }
    if (max_hops < 1) {
        throw config_error("max_hops must be >= 1");
    }
    if (target_hops && (*target_hops < 1 || *target_hops > max_hops)) {
        throw config_error("target_hops must lie in [1," + std::to_string(max_hops) + "]");
    }
    if (!(repetition_threshold > 0.0)) {
        throw config_error("repetition_threshold must be positive");
    }
    if (!(min_overlap >= 0.0 && min_overlap <= 1.0)) {
        throw config_error("min_overlap must lie in [0,1]");
    }
    if (!(lambda >= 0.0)) {
        throw config_error("lambda must be >= 0");
    }
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0 && thresholds[i] <= 1.0)) {
            throw config_error("thresholds must lie in (0,1]");
        }
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
            throw config_error("thresholds must be strictly increasing");
        }
    }
    if (train_steps < 0 || !(learning_rate > 0.0)) {
        throw config_error("train_steps must be >= 0 and learning_rate positive");
    }
    for (const auto* d : {&generation, &extraction, &construction}) {
        if (d->max_tokens < 1 || !(d->temperature >= 0.0)) {
            throw config_error("decoding needs max_tokens >= 1 and temperature >= 0");
        }
    }
}

RunConfig parse_run_config(const Json& j, const std::string& base_dir) {
    if (!j.is_object()) {
        throw config_error("top level must be an object");
    }
    RunConfig c;
    if (j.contains("generation_backend")) {
        c.generation_backend = parse_backend_kind(j.at("generation_backend"), base_dir);
    }
    if (j.contains("extraction_backend")) {
        c.extraction_backend = parse_backend_kind(j.at("extraction_backend"), base_dir);
    }
    if (j.contains("construction_backend")) {
        c.construction_backend = parse_backend_kind(j.at("construction_backend"), base_dir);
    }
    c.model = get_or<std::string>(j, "model", c.model);
    auto path_field = [&](const char* key) -> std::optional<std::string> {
        if (!j.contains(key) || j.at(key).is_null()) {
            return std::nullopt;
        }
        return resolve(base_dir, get_or<std::string>(j, key, ""));
    };
    c.scorer_path = path_field("scorer");
    c.reference_scorer_path = path_field("reference_scorer");
    c.templates_dir = path_field("templates");
    c.stopwords_path = path_field("stopwords");
    if (j.contains("target_hops") && !j.at("target_hops").is_null()) {
        c.target_hops = get_or(j, "target_hops", 1);
    }
    c.max_hops = get_or(j, "max_hops", c.max_hops);
    c.repetition_threshold = get_or(j, "repetition_threshold", c.repetition_threshold);
    c.min_overlap = get_or(j, "min_overlap", c.min_overlap);
    c.lambda = get_or(j, "lambda", c.lambda);
    c.thresholds = get_or(j, "thresholds", c.thresholds);
    c.parallel = get_or(j, "parallel", c.parallel);
    if (j.contains("seed") && !j.at("seed").is_null()) {
        c.seed = get_or<std::int64_t>(j, "seed", 0);
    }
    if (j.contains("decoding")) {
        const auto& d = j.at("decoding");
        if (d.contains("generation")) c.generation = parse_decoding(d.at("generation"), c.generation);
        if (d.contains("extraction")) c.extraction = parse_decoding(d.at("extraction"), c.extraction);
        if (d.contains("construction")) {
            c.construction = parse_decoding(d.at("construction"), c.construction);
        }
    }
    c.train_steps = get_or(j, "train_steps", c.train_steps);
    c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw config_error("cannot read " + path);
    }
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw config_error(path + ": " + e.what());
    }
    auto dir = std::filesystem::path(path).parent_path().string();
    return parse_run_config(j, dir);
}

} // namespace rulechain
