#include "rulechain/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "rulechain/metrics.hpp"

namespace rulechain {

namespace {

Error config_error(const std::string& message) {
    return Error(ErrorKind::config, "pipeline config: " + message);
}

std::string with_hop(int hop, const Error& cause) {
    return "hop " + std::to_string(hop) + ": " + cause.what();
}

std::vector<double> reference_distribution(const Scorer& reference,
                                           std::span<const std::string> statements) {
    std::vector<double> scores;
    for (const auto& s : statements) {
        scores.push_back(score(reference, s));
    }
    return softmax(scores);
}

} // namespace

void PipelineConfig::validate() const {
    if (max_hops < 1) {
        throw config_error("max_hops must be >= 1");
    }
    if (target_hops < 1 || target_hops > max_hops) {
        throw config_error("target_hops must lie in [1," + std::to_string(max_hops) + "], got " +
                           std::to_string(target_hops));
    }
    if (!(repetition_threshold > 0.0) || std::isnan(repetition_threshold)) {
        throw config_error("repetition_threshold must be positive");
    }
    if (!(min_overlap >= 0.0 && min_overlap <= 1.0)) {
        throw config_error("min_overlap must lie in [0,1]");
    }
    if (!generation_backend || !extraction_backend) {
        throw config_error("generation and extraction backends are required");
    }
    if (!scorer) {
        throw config_error("a scorer is required");
    }
    if (!(lambda >= 0.0)) {
        throw config_error("lambda must be >= 0");
    }
    try {
        generation.request("x").validate();
        extraction.request("x").validate();
    } catch (const Error& e) {
        throw config_error(e.what());
    }
}

PipelineError::PipelineError(const Error& cause, int hop, std::optional<RuleChain> partial_chain,
                             std::vector<HopResult> partial_hops)
    : Error(cause.kind(), with_hop(hop, cause)),
      hop_(hop),
      cause_message_(cause.what()),
      partial_chain_(std::move(partial_chain)),
      partial_hops_(std::move(partial_hops)) {}

HopResult run_single_hop(const EntityTyping& typing, std::span<const Atom> premises,
                         const PipelineConfig& config, int hop) {
    if (premises.empty()) {
        throw invalid_input("run_single_hop: premise list is empty");
    }
    HopResult result;
    result.hop = hop;
    result.premises.assign(premises.begin(), premises.end());
    result.generation_prompt = render_generation_prompt(typing, premises);

    try {
        result.generated_text =
            config.generation_backend->complete(config.generation.request(result.generation_prompt));
        if (trim(result.generated_text).empty()) {
            result.candidates.source_text = result.generated_text;
            return result;
        }
        result.extraction_prompt = render_extraction_prompt(result.generated_text);
        result.extraction_output =
            config.extraction_backend->complete(config.extraction.request(result.extraction_prompt));
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::invalid_input) {
            throw;
        }
        throw PipelineError(e, hop, std::nullopt, {});
    }

    auto parsed = parse_candidates(result.extraction_output, result.generated_text);
    if (config.min_overlap > 0.0) {
        parsed = faithfulness_filter(parsed, config.min_overlap,
                                     config.stopwords ? *config.stopwords : default_stopwords());
    }

    std::vector<std::string> chain_texts;
    for (const auto& p : premises) {
        chain_texts.push_back(p.plain_form());
    }
    result.candidates.source_text = parsed.source_text;
    result.candidates.diagnostics = parsed.diagnostics;
    for (auto& atom : parsed.candidates) {
        if (max_jaccard(atom.plain_form(), chain_texts) >= config.repetition_threshold) {
            result.repetition_dropped.push_back(std::move(atom));
        } else {
            result.candidates.candidates.push_back(std::move(atom));
        }
    }

    if (result.candidates.candidates.empty()) {
        return result;
    }
    for (const auto& atom : result.candidates.candidates) {
        result.statements.push_back(render_ranking_statement(typing, premises, atom));
        result.scores.push_back(score(*config.scorer, result.statements.back()));
    }
    result.chosen = result.candidates.candidates[select_best(result.scores)];
    result.reward = episode_reward(*config.scorer, result.statements);

    if (config.reference_scorer) {
        auto current = softmax(result.scores);
        auto reference = reference_distribution(*config.reference_scorer, result.statements);
        result.kl = kl_divergence(current, reference);
        result.penalized_reward = penalized_reward(result.reward, config.lambda, *result.kl);
    }
    return result;
}

MultiHopResult run_multi_hop(const EntityTyping& typing, const Atom& premise,
                             const PipelineConfig& config) {
    config.validate();
    MultiHopResult run{RuleChain(premise, config.target_hops), {}};
    std::vector<Atom> premises{premise};

    for (int hop = 1; hop <= config.target_hops; ++hop) {
        HopResult result;
        try {
            result = run_single_hop(typing, premises, config, hop);
        } catch (const PipelineError& e) {
            throw PipelineError(Error(e.kind(), e.cause_message()), e.hop(), run.chain, run.hops);
        }
        const bool chosen = result.chosen.has_value();
        if (chosen) {
            run.chain = append_hypothesis(run.chain, *result.chosen);
            premises.push_back(*result.chosen);
        }
        run.hops.push_back(std::move(result));
        if (!chosen) {
            break;
        }
    }
    return run;
}

std::vector<MultiHopResult> run_batch(std::span<const ChainJob> jobs, const PipelineConfig& config,
                                      int parallelism) {
    if (parallelism < 1) {
        throw Error(ErrorKind::config, "parallelism must be >= 1");
    }
    std::vector<std::optional<MultiHopResult>> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                PipelineConfig job_config = config;
                job_config.target_hops = jobs[i].target_hops;
                results[i] = run_multi_hop(jobs[i].typing, jobs[i].premise, job_config);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(parallelism), jobs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::vector<MultiHopResult> out;
    out.reserve(results.size());
    for (auto& r : results) {
        out.push_back(std::move(*r));
    }
    return out;
}

Json hop_record(std::size_t sample, const HopResult& hop) {
    Json j;
    j["record"] = "hop";
    j["sample"] = sample;
    j["hop"] = hop.hop;
    Json premises = Json::array();
    for (const auto& p : hop.premises) {
        premises.push_back(to_json(p));
    }
    j["premises"] = std::move(premises);
    j["generation_prompt"] = hop.generation_prompt;
    j["generated_text"] = hop.generated_text;
    j["extraction_prompt"] = hop.extraction_prompt;
    j["extraction_output"] = hop.extraction_output;
    Json candidates = Json::array();
    for (const auto& c : hop.candidates.candidates) {
        candidates.push_back(to_json(c));
    }
    j["candidates"] = std::move(candidates);
    Json dropped = Json::array();
    for (const auto& c : hop.repetition_dropped) {
        dropped.push_back(to_json(c));
    }
    j["repetition_dropped"] = std::move(dropped);
    const auto& d = hop.candidates.diagnostics;
    j["diagnostics"] = Json{{"lines_seen", d.lines_seen},
                            {"lines_parsed", d.lines_parsed},
                            {"duplicates_dropped", d.duplicates_dropped},
                            {"unfaithful_dropped", d.unfaithful_dropped}};
    j["statements"] = hop.statements;
    j["scores"] = hop.scores;
    j["chosen"] = hop.chosen ? to_json(*hop.chosen) : Json(nullptr);
    j["reward"] = hop.reward;
    if (hop.kl) {
        j["kl"] = *hop.kl;
        j["penalized_reward"] = *hop.penalized_reward;
    }
    return j;
}

Json chain_record(std::size_t sample, const RuleChain& chain) {
    Json j;
    j["record"] = "chain";
    j["sample"] = sample;
    j["chain"] = to_json(chain);
    return j;
}

} // namespace rulechain
