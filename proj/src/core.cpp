#include "rulechain/core.hpp"

#include <algorithm>
#include <cctype>

#include "rulechain/template.hpp"

namespace rulechain {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

void check_variable(const std::string& var, const char* which) {
    if (var.empty()) {
        throw invalid_input(std::string("atom: empty ") + which + " variable");
    }
    for (char c : var) {
        if (is_space(c) || c == '<' || c == '>') {
            throw invalid_input(std::string("atom: malformed ") + which + " variable '" + var + "'");
        }
    }
}

const std::string& require_string(const Json& j, const char* key, const char* what) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) {
        throw invalid_input(std::string(what) + ": missing string field '" + key + "'");
    }
    return j.at(key).get_ref<const std::string&>();
}

const PromptTemplate& generation_template() {
    static const PromptTemplate t(kGenerationTemplate);
    return t;
}

const PromptTemplate& ranking_template() {
    static const PromptTemplate t(kRankingTemplate);
    return t;
}

} // namespace

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_state: return "invalid-state";
    case ErrorKind::backend_unavailable: return "backend-unavailable";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::fixture_missing: return "fixture-missing";
    case ErrorKind::parse: return "parse";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

std::string trim(std::string_view text) {
    auto begin = std::find_if_not(text.begin(), text.end(), is_space);
    auto end = std::find_if_not(text.rbegin(), text.rend(), is_space).base();
    return begin < end ? std::string(begin, end) : std::string();
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

Atom::Atom(std::string subject_var, std::string relation, std::string object_var)
    : subject_(std::move(subject_var)),
      relation_(collapse_whitespace(relation)),
      object_(std::move(object_var)) {
    check_variable(subject_, "subject");
    check_variable(object_, "object");
    if (subject_ == object_) {
        throw invalid_input("atom: subject and object variables coincide ('" + subject_ + "')");
    }
    if (relation_.empty()) {
        throw invalid_input("atom: empty relation");
    }
    const std::string subject_mark = "<" + subject_ + ">";
    const std::string object_mark = "<" + object_ + ">";
    if (relation_.find(subject_mark) != std::string::npos ||
        relation_.find(object_mark) != std::string::npos) {
        throw invalid_input("atom: relation repeats a variable placeholder: " + relation_);
    }
}

std::string Atom::prompt_form() const {
    return "<" + subject_ + "> " + relation_ + " <" + object_ + ">";
}

std::string Atom::mask_form() const {
    return "<MASK> " + relation_ + " <MASK>";
}

std::string Atom::plain_form() const {
    return subject_ + " " + relation_ + " " + object_;
}

EntityTyping::EntityTyping(std::string type_a, std::string type_b)
    : type_a_(trim(type_a)), type_b_(trim(type_b)) {
    if (type_a_.empty() || type_b_.empty()) {
        throw invalid_input("entity typing: both type labels must be nonempty");
    }
}

std::string_view to_string(ChainStatus status) {
    switch (status) {
    case ChainStatus::complete: return "complete";
    case ChainStatus::partial_failure: return "partial_failure";
    case ChainStatus::failure: return "failure";
    }
    return "failure";
}

ChainStatus chain_status_from_string(std::string_view text) {
    if (text == "complete") return ChainStatus::complete;
    if (text == "partial_failure") return ChainStatus::partial_failure;
    if (text == "failure") return ChainStatus::failure;
    throw invalid_input("unknown chain status '" + std::string(text) + "'");
}

RuleChain::RuleChain(Atom premise, int target_hops)
    : RuleChain(std::move(premise), {}, target_hops) {}

RuleChain::RuleChain(Atom premise, std::vector<Atom> hypotheses, int target_hops)
    : premise_(std::move(premise)), hypotheses_(std::move(hypotheses)), target_hops_(target_hops) {
    if (target_hops_ < 1) {
        throw invalid_input("rule chain: target_hops must be positive");
    }
    if (hypotheses_.size() > static_cast<std::size_t>(target_hops_)) {
        throw invalid_input("rule chain: more hypotheses than target_hops");
    }
}

ChainStatus RuleChain::status() const noexcept {
    if (hypotheses_.empty()) {
        return ChainStatus::failure;
    }
    return hypotheses_.size() == static_cast<std::size_t>(target_hops_)
               ? ChainStatus::complete
               : ChainStatus::partial_failure;
}

std::vector<Atom> RuleChain::atoms() const {
    std::vector<Atom> all;
    all.reserve(hypotheses_.size() + 1);
    all.push_back(premise_);
    all.insert(all.end(), hypotheses_.begin(), hypotheses_.end());
    return all;
}

RuleChain append_hypothesis(const RuleChain& chain, const Atom& atom) {
    if (chain.size() >= static_cast<std::size_t>(chain.target_hops())) {
        throw invalid_state("append_hypothesis: chain already has " +
                            std::to_string(chain.target_hops()) + " hypotheses");
    }
    auto hypotheses = chain.hypotheses();
    hypotheses.push_back(atom);
    return RuleChain(chain.premise(), std::move(hypotheses), chain.target_hops());
}

std::vector<std::string> Sample::violations() const {
    std::vector<std::string> reasons;
    if (premise_atoms.empty()) {
        reasons.emplace_back("three-part structure violated: no premise atoms");
    }
    const auto hops = static_cast<int>(gold_chain.size());
    if (hops < kMinSampleHops || hops > kMaxSampleHops) {
        reasons.push_back("hop count out of range [1,5]: " + std::to_string(hops));
    }
    return reasons;
}

std::string join_premises(std::span<const Atom> premises) {
    std::string out;
    for (std::size_t i = 0; i < premises.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += premises[i].prompt_form();
    }
    return out;
}

std::string render_generation_prompt(const EntityTyping& typing, std::span<const Atom> premises) {
    if (premises.empty()) {
        throw invalid_input("generation prompt: premise list is empty");
    }
    return generation_template().render({
        {"type_a", typing.type_a()},
        {"type_b", typing.type_b()},
        {"premises", join_premises(premises)},
    });
}

std::string render_ranking_statement(const EntityTyping& typing,
                                     std::span<const Atom> premises,
                                     const Atom& hypothesis) {
    if (premises.empty()) {
        throw invalid_input("ranking statement: premise list is empty");
    }
    return ranking_template().render({
        {"type_a", typing.type_a()},
        {"type_b", typing.type_b()},
        {"premises", join_premises(premises)},
        {"hypothesis", hypothesis.prompt_form()},
    });
}

Json to_json(const Atom& atom) {
    Json j;
    j["subject"] = atom.subject_var();
    j["relation"] = atom.relation();
    j["object"] = atom.object_var();
    return j;
}

Json to_json(const EntityTyping& typing) {
    Json j;
    j["type_a"] = typing.type_a();
    j["type_b"] = typing.type_b();
    return j;
}

Json to_json(const RuleChain& chain) {
    Json j;
    j["premise"] = to_json(chain.premise());
    Json hyps = Json::array();
    for (const auto& h : chain.hypotheses()) {
        hyps.push_back(to_json(h));
    }
    j["hypotheses"] = std::move(hyps);
    j["target_hops"] = chain.target_hops();
    j["status"] = std::string(to_string(chain.status()));
    return j;
}

Json to_json(const Sample& sample) {
    Json j;
    Json premises = Json::array();
    for (const auto& p : sample.premise_atoms) {
        premises.push_back(to_json(p));
    }
    j["premise_atoms"] = std::move(premises);
    j["entity_types"] = to_json(sample.typing);
    j["gold_chain"] = to_json(sample.gold_chain);
    return j;
}

Atom atom_from_json(const Json& j) {
    return Atom(require_string(j, "subject", "atom"), require_string(j, "relation", "atom"),
                require_string(j, "object", "atom"));
}

EntityTyping typing_from_json(const Json& j) {
    return EntityTyping(require_string(j, "type_a", "entity_types"),
                        require_string(j, "type_b", "entity_types"));
}

RuleChain chain_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("premise")) {
        throw invalid_input("rule chain: missing 'premise'");
    }
    if (!j.contains("target_hops") || !j.at("target_hops").is_number_integer()) {
        throw invalid_input("rule chain: missing integer 'target_hops'");
    }
    std::vector<Atom> hypotheses;
    if (j.contains("hypotheses")) {
        if (!j.at("hypotheses").is_array()) {
            throw invalid_input("rule chain: 'hypotheses' must be an array");
        }
        for (const auto& h : j.at("hypotheses")) {
            hypotheses.push_back(atom_from_json(h));
        }
    }
    RuleChain chain(atom_from_json(j.at("premise")), std::move(hypotheses),
                    j.at("target_hops").get<int>());
    if (j.contains("status")) {
        if (!j.at("status").is_string()) {
            throw invalid_input("rule chain: 'status' must be a string");
        }
        auto stated = chain_status_from_string(j.at("status").get<std::string>());
        if (stated != chain.status()) {
            throw invalid_input("rule chain: status '" + j.at("status").get<std::string>() +
                                "' contradicts hop counts (expected '" +
                                std::string(to_string(chain.status())) + "')");
        }
    }
    return chain;
}

Sample sample_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("premise_atoms") || !j.contains("entity_types") ||
        !j.contains("gold_chain")) {
        throw invalid_input(
            "three-part structure violated: sample needs premise_atoms, entity_types and gold_chain");
    }
    if (!j.at("premise_atoms").is_array()) {
        throw invalid_input("sample: 'premise_atoms' must be an array");
    }
    std::vector<Atom> premises;
    for (const auto& p : j.at("premise_atoms")) {
        premises.push_back(atom_from_json(p));
    }
    return Sample{std::move(premises), typing_from_json(j.at("entity_types")),
                  chain_from_json(j.at("gold_chain"))};
}

} // namespace rulechain
