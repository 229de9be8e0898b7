#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rulechain/backend.hpp"
#include "rulechain/pipeline.hpp"

namespace rulechain {

/// Declarative run settings. Loaded from a JSON file; command-line flags are
/// applied on top afterwards. Relative paths are resolved against the
/// directory of the config file.
///
/// Backend objects look like
///   {"kind": "mock", "fixtures": "fixtures/generation.json", "fallback": false}
///   {"kind": "http", "endpoint": "http://localhost:8000/v1", "model": "gpt2",
///    "timeout_ms": 60000, "retries": 3, "backoff_ms": 500, "max_connections": 4}
struct RunConfig {
    std::optional<BackendKind> generation_backend;
    std::optional<BackendKind> extraction_backend;
    std::optional<BackendKind> construction_backend;
    std::string model = "default";
    std::optional<std::string> scorer_path;
    std::optional<std::string> reference_scorer_path;
    std::optional<std::string> templates_dir;
    std::optional<std::string> stopwords_path;
    std::optional<int> target_hops;
    int max_hops = kMaxSampleHops;
    double repetition_threshold = 0.95;
    double min_overlap = 0.0;
    double lambda = 0.2;
    std::vector<double> thresholds{0.80, 0.90, 0.95};
    int parallel = 1;
    std::optional<std::int64_t> seed;
    StageDecoding generation{512, 0.7, std::nullopt};
    StageDecoding extraction{256, 0.0, std::nullopt};
    StageDecoding construction{1024, 0.7, std::nullopt};
    int train_steps = 100;
    double learning_rate = 0.1;

    // Throws Error(config) on the first violated constraint.
    void validate() const;
};

RunConfig parse_run_config(const Json& j, const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

BackendKind parse_backend_kind(const Json& j, const std::string& base_dir);

} // namespace rulechain
