#pragma once

// Builds mock-backend fixture tables for a scripted multi-hop run, plus a
// feature map that lets tests pin exact statement scores.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rulechain/backend.hpp"
#include "rulechain/dataset.hpp"
#include "rulechain/extraction.hpp"
#include "rulechain/features.hpp"
#include "rulechain/pipeline.hpp"

namespace scripted {

using rulechain::Atom;

struct Hop {
    std::string generated;
    std::string extraction_output;
    // Relation the run is expected to pick; it is appended to the premises
    // that key the next hop's fixture. Empty for a failing hop.
    std::string chosen;
};

struct Fixtures {
    std::map<std::string, std::string, std::less<>> generation;
    std::map<std::string, std::string, std::less<>> extraction;
};

inline void add_chain(Fixtures& fx, const rulechain::EntityTyping& typing, const Atom& premise,
                      const std::vector<Hop>& hops) {
    std::vector<Atom> premises{premise};
    for (const auto& hop : hops) {
        fx.generation[rulechain::render_generation_prompt(typing, premises)] = hop.generated;
        if (!hop.generated.empty()) {
            fx.extraction[rulechain::render_extraction_prompt(hop.generated)] = hop.extraction_output;
        }
        if (hop.chosen.empty()) break;
        premises.emplace_back("A", hop.chosen, "B");
    }
}

// One feature: the value of the first table key found in the hypothesis
// part of the statement (after " we can get "), else 0.
class HypothesisScores final : public rulechain::FeatureMap {
public:
    explicit HypothesisScores(std::map<std::string, double> table) : table_(std::move(table)) {}
    std::size_t dimension() const override { return 1; }
    std::string version() const override { return "hypothesis-scores"; }
    std::vector<double> extract(std::string_view statement) const override {
        auto cut = statement.rfind(" we can get ");
        auto hyp = cut == std::string_view::npos ? statement : statement.substr(cut);
        for (const auto& [key, value] : table_) {
            if (hyp.find("<A> " + key + " <B>") != std::string_view::npos) return {value};
        }
        return {0.0};
    }

private:
    std::map<std::string, double> table_;
};

inline rulechain::PipelineConfig config_for(const Fixtures& fx, std::shared_ptr<const rulechain::Scorer> scorer,
                                            int target_hops, bool fallback = false) {
    rulechain::PipelineConfig c;
    c.target_hops = target_hops;
    c.generation_backend = std::make_shared<rulechain::MockBackend>(rulechain::MockSettings{fx.generation, fallback});
    c.extraction_backend = std::make_shared<rulechain::MockBackend>(rulechain::MockSettings{fx.extraction, fallback});
    c.scorer = std::move(scorer);
    return c;
}

inline std::shared_ptr<const rulechain::Scorer> table_scorer(std::map<std::string, double> table) {
    return std::make_shared<rulechain::Scorer>(std::make_shared<HypothesisScores>(std::move(table)),
                                               std::vector<double>{1.0});
}

struct ConstructionHop {
    std::string generated;
    std::string extraction_output;
    std::string ranking_output;
};

// Fixture prompts for construct_sample under the given templates. Stops
// after the first hop whose ranking output is empty.
inline void add_construction(std::map<std::string, std::string, std::less<>>& fixtures,
                             const rulechain::ConstructionTemplates& t, const rulechain::EntityTyping& typing,
                             const Atom& premise, const std::vector<ConstructionHop>& hops) {
    std::vector<Atom> premises{premise};
    for (const auto& hop : hops) {
        const std::string joined = rulechain::join_premises(premises);
        fixtures[t.generation.render({{"type_a", typing.type_a()}, {"type_b", typing.type_b()}, {"premises", joined}})] =
            hop.generated;
        fixtures[t.extraction.render({{"text", hop.generated}})] = hop.extraction_output;
        auto cands = rulechain::parse_candidates(hop.extraction_output).candidates;
        if (cands.empty()) break;
        std::string lines = rulechain::render_candidate_lines(cands);
        lines.pop_back();
        fixtures[t.ranking.render({{"type_a", typing.type_a()},
                                   {"type_b", typing.type_b()},
                                   {"premises", joined},
                                   {"candidates", lines}})] = hop.ranking_output;
        auto ranked = rulechain::parse_candidates(hop.ranking_output).candidates;
        if (ranked.empty()) break;
        premises.push_back(ranked.front());
    }
}

} // namespace scripted
