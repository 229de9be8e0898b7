// Writes the mock fixture suite under fixtures/: a small dataset, scripted
// generation/extraction completions, ranked lists plus the scorer trained on
// them, and construction-protocol completions for dataset-build.
//
//   fixturegen --out fixtures        regenerate
//   fixturegen --check fixtures      exit 1 if the shipped files are stale

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "rulechain/dataset.hpp"
#include "rulechain/pipeline.hpp"
#include "rulechain/scoring.hpp"

using namespace rulechain;

namespace {

using FixtureMap = std::map<std::string, std::string, std::less<>>;

struct Hop {
    std::string generated;
    std::string extraction_output;
};

struct Scenario {
    EntityTyping typing;
    std::string premise;
    std::vector<std::string> gold;
    std::vector<Hop> hops;
};

struct Ranking {
    EntityTyping typing;
    std::string premise;
    std::vector<std::string> ranked;
};

struct ConstructionHop {
    std::string generated;
    std::string extraction_output;
    std::string ranking_output;
};

struct Seed {
    EntityTyping typing;
    std::string premise;
    int hops;
    std::vector<ConstructionHop> script;
};

Atom ab(const std::string& relation) { return Atom("A", relation, "B"); }

std::vector<Scenario> scenarios() {
    return {
        {{"Transit Stop", "Transit Line"},
         "is stop of",
         {"is served by", "is a major part of", "is a boarding point of"},
         {{"Orion is served by the Red Line, and the station is a major part of the line's route. Riders "
           "board the line at the stop every few minutes.",
           "1. <A> is served by <B>\n2. <A> is a major part of <B>\n3. <A> is stop of <B>"},
          {"Because the stop lies on the line, the line provides transit connections to the stop and "
           "passengers can transfer there.",
           "1. <B> provides transit connections to <A>\n2. <A> is a transfer point of <B>"},
          {"The stop is a boarding point of the line and it is listed on the timetable of the line.",
           "- <A> is a boarding point of <B>\n- <A> is listed on the timetable of <B>"}}},
        {{"Organization", "Form of Government"},
         "is ruling party of",
         {"forms the government of", "shapes the policy of", "appoints the cabinet of",
          "provides the head of government of"},
         {{"The party holds the majority in the legislature of the state and forms the government.",
           "1. <A> holds the majority in <B>\n2. <A> forms the government of <B>"},
          {"As the governing party it shapes the policy of the state and appoints the cabinet.",
           "1. <A> shapes the policy of <B>\n2. <A> appoints the cabinet of <B>"},
          {"The party is accountable to the parliament of the state.",
           "<A> is accountable to the parliament of <B>"},
          {"Its leader usually becomes the head of government, so the party forms the national government "
           "of the state.",
           "<A> forms the national government of <B>"}}},
        {{"Person", "Country"},
         "was born in",
         {"is a citizen of", "holds a passport of"},
         {{"A person born in a country is usually a citizen of that country and often lives in it.",
           "1. <A> is a citizen of <B>\n2. <A> lives in <B>\n3. <A> was born in <B>."},
          {"Citizens can vote in the elections of their country and hold its passport.",
           "1. <A> votes in the elections of <B>\n2. <A> holds a passport of <B>"}}},
        {{"City", "Province"},
         "is capital of",
         {"is the seat of government of", "hosts the assembly of", "is the largest city of"},
         {{"The city hosts the provincial assembly.", "I am not sure which relationships are meant here."}}},
        {{"Athlete", "Sports Team"},
         "plays for",
         {"is a member of", "trains with", "is registered with", "competes for"},
         {{"The athlete is a member of the team and wears its jersey in every match.",
           "1. <A> is a member of <B>\n2. <A> wears the jersey of <B>"},
          {"The athlete trains with the team and the club pays the athlete's salary.",
           "1. <A> trains with <B>\n2. <B> pays the salary of <A>"},
          {"It is hard to say more about them.", "Nothing else can be derived from the text."}}},
        {{"Mountain", "Country"},
         "is located in",
         {"is the highest peak of", "lies within"},
         {{"The mountain is located in the country and is the highest peak of the country.",
           "1. <A> is located in <B>\n2. <A> is the highest peak of <B>\n3. <A> lies within <B>"},
          {"The mountain lies within the borders of the country and attracts climbers to the country.",
           "1. <A> lies within the borders of <B>\n2. <A> attracts climbers to <B>\n3. <A> is the highest "
           "peak of <B>"}}},
    };
}

std::vector<Ranking> rankings() {
    return {
        {{"Transit Stop", "Transit Line"}, "is stop of", {"is served by", "is a major part of", "is a transfer point of"}},
        {{"Transit Stop", "Transit Line"}, "is stop of", {"is a boarding point of", "is listed on the timetable of"}},
        {{"Organization", "Form of Government"}, "is ruling party of", {"forms the government of", "holds the majority in", "appoints the cabinet of"}},
        {{"Person", "Country"}, "was born in", {"is a citizen of", "lives in", "votes in the elections of"}},
        {{"Athlete", "Sports Team"}, "plays for", {"is a member of", "trains with", "wears the jersey of"}},
        {{"Mountain", "Country"}, "is located in", {"is the highest peak of", "attracts climbers to"}},
        {{"City", "Province"}, "is capital of", {"is the seat of government of", "hosts the assembly of"}},
    };
}

std::vector<Seed> seeds() {
    return {
        {{"Transit Stop", "Transit Line"},
         "is stop of",
         3,
         {{"Orion is served by the Red Line and is a major part of its route.",
           "1. <A> is served by <B>\n2. <A> is a major part of <B>",
           "1. <A> is served by <B>\n2. <A> is a major part of <B>"},
          {"The line provides transit connections to the stop.",
           "1. <B> provides transit connections to <A>\n2. <A> is a transfer point of <B>",
           "1. <A> is a transfer point of <B>\n2. <B> provides transit connections to <A>"},
          {"The stop is a boarding point of the line.", "<A> is a boarding point of <B>",
           "<A> is a boarding point of <B>"}}},
        {{"Person", "Country"},
         "was born in",
         2,
         {{"A person born in a country is usually a citizen of it and lives there.",
           "1. <A> is a citizen of <B>\n2. <A> lives in <B>", "1. <A> is a citizen of <B>\n2. <A> lives in <B>"},
          {"Citizens hold the passport of their country.", "<A> holds a passport of <B>",
           "<A> holds a passport of <B>"}}},
        {{"Athlete", "Sports Team"},
         "plays for",
         2,
         {{"The athlete is a member of the team.", "<A> is a member of <B>", "<A> is a member of <B>"},
          {"Not much else is known.", "No relationships found.", ""}}},
    };
}

std::string jsonl(const std::vector<Json>& rows) {
    std::string out;
    for (const auto& r : rows) out += r.dump() + "\n";
    return out;
}

std::string pretty(const Json& j) { return j.dump(2) + "\n"; }

Json fixtures_json(const FixtureMap& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

std::map<std::string, std::string> build() {
    std::map<std::string, std::string> files;

    DatasetFile dataset;
    for (const auto& s : scenarios()) {
        std::vector<Atom> gold;
        for (const auto& g : s.gold) gold.push_back(ab(g));
        int target = static_cast<int>(gold.size());
        dataset.samples.push_back(Sample{{ab(s.premise)}, s.typing, RuleChain(ab(s.premise), gold, target)});
    }
    dataset.provenance = Provenance{"Freebase (fixture)", "fixturegen", "2026-01-01", dataset.samples.size()};
    files["samples.jsonl"] = serialize_dataset(dataset);

    std::vector<Json> ranking_rows;
    std::vector<TrainingExample> examples;
    auto features = default_feature_map();
    for (const auto& r : rankings()) {
        Json row;
        row["entity_types"] = to_json(r.typing);
        row["premises"] = Json::array({to_json(ab(r.premise))});
        Json ranked = Json::array();
        std::vector<std::string> statements;
        std::vector<Atom> premises{ab(r.premise)};
        for (const auto& rel : r.ranked) {
            ranked.push_back(to_json(ab(rel)));
            statements.push_back(render_ranking_statement(r.typing, premises, ab(rel)));
        }
        row["ranked"] = ranked;
        ranking_rows.push_back(row);
        examples.push_back(make_training_example(RankedList(statements), *features));
    }
    files["rankings.jsonl"] = jsonl(ranking_rows);
    auto scorer = std::make_shared<Scorer>(train_pairwise_scorer(examples, {100, 0.1, 0, 0}, features));
    files["scorer.json"] = pretty(scorer_to_json(*scorer));

    FixtureMap generation, extraction;
    for (const auto& s : scenarios()) {
        std::vector<Atom> premises{ab(s.premise)};
        for (std::size_t k = 0; k < s.hops.size(); ++k) {
            const auto& hop = s.hops[k];
            generation[render_generation_prompt(s.typing, premises)] = hop.generated;
            extraction[render_extraction_prompt(hop.generated)] = hop.extraction_output;
            PipelineConfig cfg;
            cfg.generation_backend = std::make_shared<MockBackend>(MockSettings{generation, false});
            cfg.extraction_backend = std::make_shared<MockBackend>(MockSettings{extraction, false});
            cfg.scorer = scorer;
            auto result = run_single_hop(s.typing, premises, cfg, static_cast<int>(k + 1));
            if (!result.chosen) break;
            premises.push_back(*result.chosen);
        }
    }
    files["generation.json"] = pretty(fixtures_json(generation));
    files["extraction.json"] = pretty(fixtures_json(extraction));

    FixtureMap construction;
    std::vector<Json> seed_rows;
    const auto templates = ConstructionTemplates::defaults();
    for (const auto& seed : seeds()) {
        seed_rows.push_back({{"premise", to_json(ab(seed.premise))},
                             {"entity_types", to_json(seed.typing)},
                             {"hops", seed.hops}});
        std::vector<Atom> premises{ab(seed.premise)};
        for (const auto& hop : seed.script) {
            const std::string joined = join_premises(premises);
            const std::map<std::string, std::string, std::less<>> types{
                {"type_a", seed.typing.type_a()}, {"type_b", seed.typing.type_b()}, {"premises", joined}};
            construction[templates.generation.render(types)] = hop.generated;
            construction[templates.extraction.render({{"text", hop.generated}})] = hop.extraction_output;
            auto candidates = parse_candidates(hop.extraction_output).candidates;
            if (candidates.empty()) break;
            std::string lines = render_candidate_lines(candidates);
            lines.pop_back();
            auto ranking_slots = types;
            ranking_slots["candidates"] = lines;
            construction[templates.ranking.render(ranking_slots)] = hop.ranking_output;
            auto ranked = parse_candidates(hop.ranking_output).candidates;
            if (ranked.empty()) break;
            premises.push_back(ranked.front());
        }
    }
    files["seeds.jsonl"] = jsonl(seed_rows);
    files["construction.json"] = pretty(fixtures_json(construction));

    Json config;
    config["generation_backend"] = {{"kind", "mock"}, {"fixtures", "generation.json"}, {"fallback", false}};
    config["extraction_backend"] = {{"kind", "mock"}, {"fixtures", "extraction.json"}, {"fallback", false}};
    config["construction_backend"] = {{"kind", "mock"}, {"fixtures", "construction.json"}, {"fallback", false}};
    config["scorer"] = "scorer.json";
    config["templates"] = "../data/templates";
    config["stopwords"] = "../data/stopwords.txt";
    config["repetition_threshold"] = 0.95;
    config["thresholds"] = {0.8, 0.9, 0.95};
    config["parallel"] = 2;
    config["decoding"] = {{"generation", {{"max_tokens", 512}, {"temperature", 0.7}, {"seed", 7}}},
                          {"extraction", {{"max_tokens", 256}, {"temperature", 0.0}}}};
    files["config.json"] = pretty(config);
    return files;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regenerate the mock fixture suite"};
    std::string out, check;
    auto* out_opt = app.add_option("--out", out, "Directory to write");
    auto* check_opt = app.add_option("--check", check, "Directory to compare against");
    out_opt->excludes(check_opt);
    CLI11_PARSE(app, argc, argv);
    if (out.empty() && check.empty()) {
        std::cerr << "fixturegen: pass --out DIR or --check DIR\n";
        return 2;
    }

    std::map<std::string, std::string> files;
    try {
        files = build();
    } catch (const std::exception& e) {
        std::cerr << "fixturegen: " << e.what() << "\n";
        return 1;
    }

    if (!check.empty()) {
        int stale = 0;
        for (const auto& [name, content] : files) {
            auto path = std::filesystem::path(check) / name;
            if (!std::filesystem::exists(path) || read_file(path) != content) {
                std::cerr << "stale: " << path.string() << "\n";
                ++stale;
            }
        }
        if (stale) {
            std::cerr << "run: fixturegen --out " << check << "\n";
            return 1;
        }
        std::cout << files.size() << " fixture files up to date\n";
        return 0;
    }

    std::filesystem::create_directories(out);
    for (const auto& [name, content] : files) {
        std::ofstream f(std::filesystem::path(out) / name, std::ios::binary);
        f << content;
        if (!f) {
            std::cerr << "fixturegen: cannot write " << name << "\n";
            return 1;
        }
    }
    std::cout << "wrote " << files.size() << " files to " << out << "\n";
    return 0;
}
