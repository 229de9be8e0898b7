#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rulechain/core.hpp"

namespace rulechain {

// Freebase property names used to harvest premise atoms.
inline constexpr std::string_view kNameProperty = "type.object.name";
inline constexpr std::string_view kNotableTypeProperty = "common.topic.notable.types";
inline constexpr std::string_view kDescriptionProperty = "common.topic.description";
inline constexpr std::string_view kFreebaseNamespace = "http://rdf.freebase.com/ns/";

enum class QueryStage { entity_seed, neighbor };

/// Entities carrying a name, a notable type and a description.
/// Projects ?entity ?name ?typeName.
std::string build_entity_seed_query(std::size_t limit = 100);

/// Entities reachable from `entity_id` by one relation that carry the same
/// three properties. Projects ?relation ?entity2 ?name2 ?typeName2.
/// `entity_id` is a Freebase mid ("m.0abc") or its full IRI; anything else
/// throws invalid_input.
std::string build_neighbor_query(std::string_view entity_id, std::size_t limit = 100);

std::string build_sparql_query(QueryStage stage, std::string_view entity_id = {},
                               std::size_t limit = 100);

using SparqlRow = std::map<std::string, std::string, std::less<>>;

/// Parses application/sparql-results+json into variable -> value rows.
/// Throws Error(protocol) on a malformed document.
std::vector<SparqlRow> parse_sparql_results(std::string_view body);

struct SparqlSettings {
    std::string endpoint;  // absolute URL of the query service
    std::chrono::milliseconds timeout{30'000};
    bool use_post = false;
};

class SparqlClient {
public:
    explicit SparqlClient(SparqlSettings settings);

    // Throws Error(backend_unavailable) on transport failure or non-2xx status.
    std::vector<SparqlRow> select(const std::string& query) const;

private:
    SparqlSettings settings_;
};

struct EntityPair {
    std::string entity1;
    std::string name1;
    std::string type1;
    std::string relation;
    std::string entity2;
    std::string name2;
    std::string type2;
};

/// "m.0abc" from "http://rdf.freebase.com/ns/m.0abc"; other strings unchanged.
std::string freebase_local_name(std::string_view iri);

/// "transportation.bus_stop.serves_line" -> "serves line".
std::string relation_phrase(std::string_view relation_iri);

/// Premise atom <A> {relation phrase} <B> plus the two entity types.
std::pair<EntityTyping, Atom> premise_from_pair(const EntityPair& pair);

/// Seed query, then one neighbor query per seed entity.
std::vector<EntityPair> harvest_pairs(const SparqlClient& client, std::size_t seed_limit,
                                      std::size_t neighbors_per_seed);

} // namespace rulechain
