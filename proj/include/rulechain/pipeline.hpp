#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rulechain/backend.hpp"
#include "rulechain/core.hpp"
#include "rulechain/extraction.hpp"
#include "rulechain/scoring.hpp"

namespace rulechain {

struct StageDecoding {
    int max_tokens = 512;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;

    CompletionRequest request(std::string prompt) const {
        return CompletionRequest{std::move(prompt), max_tokens, temperature, seed};
    }
};

struct PipelineConfig {
    int target_hops = 3;
    int max_hops = kMaxSampleHops;
    // Candidates whose Jaccard similarity to an atom already in the chain
    // reaches this value are dropped before ranking. Values above 1 disable it.
    double repetition_threshold = 0.95;
    // 0 keeps every candidate.
    double min_overlap = 0.0;
    // Null means default_stopwords().
    std::shared_ptr<const StopwordSet> stopwords;
    std::shared_ptr<const Backend> generation_backend;
    std::shared_ptr<const Backend> extraction_backend;
    std::shared_ptr<const Scorer> scorer;
    StageDecoding generation{512, 0.7, std::nullopt};
    StageDecoding extraction{256, 0.0, std::nullopt};
    // With a reference scorer, each hop also reports KL(softmax(scores) ||
    // softmax(reference scores)) and reward - lambda * KL.
    std::shared_ptr<const Scorer> reference_scorer;
    double lambda = 0.2;

    // Throws Error(config) describing the first violated constraint.
    void validate() const;
};

struct HopResult {
    int hop = 1;
    std::vector<Atom> premises;
    std::string generation_prompt;
    std::string generated_text;
    std::string extraction_prompt;
    std::string extraction_output;
    CandidateSet candidates;               // survivors, aligned with statements/scores
    std::vector<Atom> repetition_dropped;  // parsed but too close to the chain
    std::vector<std::string> statements;
    std::vector<double> scores;
    std::optional<Atom> chosen;
    double reward = 0.0;
    std::optional<double> kl;
    std::optional<double> penalized_reward;
};

struct MultiHopResult {
    RuleChain chain;
    std::vector<HopResult> hops;
};

// A backend failure annotated with where it happened and what had been
// produced up to that point.
class PipelineError : public Error {
public:
    PipelineError(const Error& cause, int hop, std::optional<RuleChain> partial_chain,
                  std::vector<HopResult> partial_hops);

    int hop() const noexcept { return hop_; }
    // The underlying failure message, without the hop prefix.
    const std::string& cause_message() const noexcept { return cause_message_; }
    const std::optional<RuleChain>& partial_chain() const noexcept { return partial_chain_; }
    const std::vector<HopResult>& partial_hops() const noexcept { return partial_hops_; }

private:
    int hop_;
    std::string cause_message_;
    std::optional<RuleChain> partial_chain_;
    std::vector<HopResult> partial_hops_;
};

HopResult run_single_hop(const EntityTyping& typing, std::span<const Atom> premises,
                         const PipelineConfig& config, int hop = 1);

/// Chains single hops until target_hops is reached or a hop yields no atom.
/// The premise list for hop k is the initial premise plus the k-1 atoms chosen so far.
MultiHopResult run_multi_hop(const EntityTyping& typing, const Atom& premise,
                             const PipelineConfig& config);

struct ChainJob {
    EntityTyping typing;
    Atom premise;
    int target_hops;
};

/// Runs independent chains on up to `parallelism` threads. Results come back
/// in job order. If any job fails, the failure of the lowest-indexed failing
/// job is rethrown after all workers finish.
std::vector<MultiHopResult> run_batch(std::span<const ChainJob> jobs, const PipelineConfig& config,
                                      int parallelism);

Json hop_record(std::size_t sample, const HopResult& hop);
Json chain_record(std::size_t sample, const RuleChain& chain);

} // namespace rulechain
