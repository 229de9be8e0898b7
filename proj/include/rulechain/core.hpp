#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rulechain/error.hpp"

namespace rulechain {

using Json = nlohmann::ordered_json;

/**
 * One open-rule fact (subject, relation, object) whose endpoints are entity
 * variables rather than grounded entities.
 *
 * Stored once in canonical form and rendered on demand:
 *   - prompt form  "<A> is stop of <B>"
 *   - mask form    "<MASK> is stop of <MASK>"
 *   - plain form   "A is stop of B"
 */
class Atom {
public:
    // Throws invalid_input when the relation is blank after trimming, a
    // variable is empty or contains whitespace/angle brackets, or both
    // variables coincide. Whitespace inside the relation is collapsed.
    Atom(std::string subject_var, std::string relation, std::string object_var);

    const std::string& subject_var() const noexcept { return subject_; }
    const std::string& relation() const noexcept { return relation_; }
    const std::string& object_var() const noexcept { return object_; }

    std::string prompt_form() const;
    std::string mask_form() const;
    std::string plain_form() const;

    friend bool operator==(const Atom&, const Atom&) = default;

private:
    std::string subject_;
    std::string relation_;
    std::string object_;
};

struct EntityTyping {
    EntityTyping(std::string type_a, std::string type_b);

    const std::string& type_a() const noexcept { return type_a_; }
    const std::string& type_b() const noexcept { return type_b_; }

    friend bool operator==(const EntityTyping&, const EntityTyping&) = default;

private:
    std::string type_a_;
    std::string type_b_;
};

enum class ChainStatus { complete, partial_failure, failure };

std::string_view to_string(ChainStatus status);
ChainStatus chain_status_from_string(std::string_view text);

/// Premise atom plus the hypothesis atoms deduced from it, in order.
/// The status is a function of (|hypotheses|, target_hops) and is never stored.
class RuleChain {
public:
    RuleChain(Atom premise, int target_hops);
    RuleChain(Atom premise, std::vector<Atom> hypotheses, int target_hops);

    const Atom& premise() const noexcept { return premise_; }
    const std::vector<Atom>& hypotheses() const noexcept { return hypotheses_; }
    int target_hops() const noexcept { return target_hops_; }
    std::size_t size() const noexcept { return hypotheses_.size(); }
    ChainStatus status() const noexcept;

    /// Premise followed by every hypothesis, in generation order.
    std::vector<Atom> atoms() const;

    friend bool operator==(const RuleChain&, const RuleChain&) = default;

private:
    Atom premise_;
    std::vector<Atom> hypotheses_;
    int target_hops_;
};

// Returns a new chain with `atom` appended; throws invalid_state when the
// chain already holds target_hops hypotheses.
RuleChain append_hypothesis(const RuleChain& chain, const Atom& atom);

inline constexpr int kMinSampleHops = 1;
inline constexpr int kMaxSampleHops = 5;

// A dataset record. Construction may produce one that violations() rejects.
struct Sample {
    std::vector<Atom> premise_atoms;
    EntityTyping typing;
    RuleChain gold_chain;

    /// Reasons this sample violates the dataset invariants; empty when valid.
    std::vector<std::string> violations() const;

    friend bool operator==(const Sample&, const Sample&) = default;
};

// Prompt texts for the generation stage and the ranking statement. Slots:
// {type_a}, {type_b}, {premises}, and {hypothesis} for the statement.
inline constexpr std::string_view kGenerationTemplate =
    "If A is {type_a}, B is {type_b}, {premises}, then what other relationships can we "
    "derive between A and B?";
inline constexpr std::string_view kRankingTemplate =
    "If A is {type_a}, B is {type_b}, {premises}, we can get {hypothesis}.";

// Both renderers throw invalid_input on an empty premise list.
std::string render_generation_prompt(const EntityTyping& typing, std::span<const Atom> premises);

std::string render_ranking_statement(const EntityTyping& typing,
                                     std::span<const Atom> premises,
                                     const Atom& hypothesis);

/// "<A> r1 <B>, <A> r2 <B>": prompt forms joined by ", " in the given order.
std::string join_premises(std::span<const Atom> premises);

std::string trim(std::string_view text);
std::string collapse_whitespace(std::string_view text);

// JSON shapes: {"subject":"A","relation":"is stop of","object":"B"} for Atom;
// RuleChain and Sample nest it. Key order is fixed.
Json to_json(const Atom& atom);
Json to_json(const EntityTyping& typing);
Json to_json(const RuleChain& chain);
Json to_json(const Sample& sample);

// These throw invalid_input naming the offending field.
Atom atom_from_json(const Json& j);
EntityTyping typing_from_json(const Json& j);
RuleChain chain_from_json(const Json& j);
Sample sample_from_json(const Json& j);

} // namespace rulechain
