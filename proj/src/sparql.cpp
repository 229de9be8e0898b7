#include "rulechain/sparql.hpp"

#include <httplib.h>

#include "rulechain/backend.hpp"

namespace rulechain {

namespace {

bool valid_local_name(std::string_view name) {
    if (name.empty() || name.front() == '.' || name.back() == '.') {
        return false;
    }
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '.';
        if (!ok) {
            return false;
        }
    }
    return true;
}

std::string prefix_block() {
    return "PREFIX ns: <" + std::string(kFreebaseNamespace) + ">\n";
}

} // namespace

std::string build_entity_seed_query(std::size_t limit) {
    std::string q = prefix_block();
    q += "SELECT DISTINCT ?entity ?name ?typeName WHERE {\n";
    q += "  ?entity ns:" + std::string(kNameProperty) + " ?name .\n";
    q += "  ?entity ns:" + std::string(kNotableTypeProperty) + " ?type .\n";
    q += "  ?type ns:" + std::string(kNameProperty) + " ?typeName .\n";
    q += "  ?entity ns:" + std::string(kDescriptionProperty) + " ?description .\n";
    q += "  FILTER (lang(?name) = \"en\")\n";
    q += "  FILTER (lang(?typeName) = \"en\")\n";
    q += "}\n";
    q += "LIMIT " + std::to_string(limit) + "\n";
    return q;
}

std::string build_neighbor_query(std::string_view entity_id, std::size_t limit) {
    const std::string local = freebase_local_name(entity_id);
    if (!valid_local_name(local)) {
        throw invalid_input("sparql: invalid entity identifier '" + std::string(entity_id) + "'");
    }
    const std::string seed = "ns:" + local;
    std::string q = prefix_block();
    q += "SELECT DISTINCT ?relation ?entity2 ?name2 ?typeName2 WHERE {\n";
    q += "  " + seed + " ?relation ?entity2 .\n";
    q += "  ?entity2 ns:" + std::string(kNameProperty) + " ?name2 .\n";
    q += "  ?entity2 ns:" + std::string(kNotableTypeProperty) + " ?type2 .\n";
    q += "  ?type2 ns:" + std::string(kNameProperty) + " ?typeName2 .\n";
    q += "  ?entity2 ns:" + std::string(kDescriptionProperty) + " ?description2 .\n";
    q += "  FILTER (?entity2 != " + seed + ")\n";
    q += "  FILTER (lang(?name2) = \"en\")\n";
    q += "  FILTER (lang(?typeName2) = \"en\")\n";
    q += "}\n";
    q += "LIMIT " + std::to_string(limit) + "\n";
    return q;
}

std::string build_sparql_query(QueryStage stage, std::string_view entity_id, std::size_t limit) {
    return stage == QueryStage::entity_seed ? build_entity_seed_query(limit)
                                            : build_neighbor_query(entity_id, limit);
}

std::vector<SparqlRow> parse_sparql_results(std::string_view body) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::protocol, std::string("sparql results are not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("results") || !j["results"].contains("bindings") ||
        !j["results"]["bindings"].is_array()) {
        throw Error(ErrorKind::protocol, "sparql results lack results.bindings");
    }
    std::vector<SparqlRow> rows;
    for (const auto& binding : j["results"]["bindings"]) {
        if (!binding.is_object()) {
            throw Error(ErrorKind::protocol, "sparql binding is not an object");
        }
        SparqlRow row;
        for (const auto& [var, cell] : binding.items()) {
            if (!cell.is_object() || !cell.contains("value") || !cell["value"].is_string()) {
                throw Error(ErrorKind::protocol, "sparql binding for ?" + var + " has no value");
            }
            row.emplace(var, cell["value"].get<std::string>());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

SparqlClient::SparqlClient(SparqlSettings settings) : settings_(std::move(settings)) {
    parse_endpoint(settings_.endpoint);
}

std::vector<SparqlRow> SparqlClient::select(const std::string& query) const {
    const auto ep = parse_endpoint(settings_.endpoint);
    httplib::Client client(ep.origin());
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(settings_.timeout);
    client.set_connection_timeout(seconds.count());
    client.set_read_timeout(seconds.count());
    httplib::Headers headers{{"Accept", "application/sparql-results+json"}};
    const std::string path = ep.base_path.empty() ? "/" : ep.base_path;

    httplib::Result result;
    if (settings_.use_post) {
        httplib::Params params{{"query", query}};
        result = client.Post(path, headers, params);
    } else {
        httplib::Params params{{"query", query}};
        result = client.Get(path, params, headers);
    }
    if (!result) {
        throw Error(ErrorKind::backend_unavailable,
                    "sparql endpoint " + settings_.endpoint + ": " + httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
        throw Error(ErrorKind::backend_unavailable,
                    "sparql endpoint " + settings_.endpoint + ": HTTP status " +
                        std::to_string(result->status));
    }
    return parse_sparql_results(result->body);
}

std::string freebase_local_name(std::string_view iri) {
    if (iri.starts_with(kFreebaseNamespace)) {
        return std::string(iri.substr(kFreebaseNamespace.size()));
    }
    if (iri.starts_with("ns:")) {
        return std::string(iri.substr(3));
    }
    return std::string(iri);
}

std::string relation_phrase(std::string_view relation_iri) {
    std::string local = freebase_local_name(relation_iri);
    if (auto dot = local.rfind('.'); dot != std::string::npos) {
        local = local.substr(dot + 1);
    }
    for (char& c : local) {
        if (c == '_') {
            c = ' ';
        }
    }
    return collapse_whitespace(local);
}

std::pair<EntityTyping, Atom> premise_from_pair(const EntityPair& pair) {
    return {EntityTyping(pair.type1, pair.type2), Atom("A", relation_phrase(pair.relation), "B")};
}

std::vector<EntityPair> harvest_pairs(const SparqlClient& client, std::size_t seed_limit,
                                      std::size_t neighbors_per_seed) {
    std::vector<EntityPair> pairs;
    for (const auto& seed : client.select(build_entity_seed_query(seed_limit))) {
        auto get = [](const SparqlRow& row, std::string_view key) -> std::string {
            auto it = row.find(key);
            return it == row.end() ? std::string() : it->second;
        };
        const auto entity = get(seed, "entity");
        if (entity.empty() || !valid_local_name(freebase_local_name(entity))) {
            continue;
        }
        for (const auto& n : client.select(build_neighbor_query(entity, neighbors_per_seed))) {
            EntityPair pair{freebase_local_name(entity), get(seed, "name"), get(seed, "typeName"),
                            get(n, "relation"), freebase_local_name(get(n, "entity2")),
                            get(n, "name2"), get(n, "typeName2")};
            if (pair.type1.empty() || pair.type2.empty() || relation_phrase(pair.relation).empty()) {
                continue;
            }
            pairs.push_back(std::move(pair));
        }
    }
    return pairs;
}

} // namespace rulechain
