#include "rulechain/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <mutex>
#include <sstream>
#include <thread>

#include "rulechain/config.hpp"
#include "rulechain/dataset.hpp"
#include "rulechain/metrics.hpp"
#include "rulechain/pipeline.hpp"
#include "rulechain/scoring.hpp"
#include "rulechain/sparql.hpp"

namespace rulechain::cli {

namespace {

constexpr const char* kPrecedence =
    "Settings come from built-in defaults, then --config FILE, then flags; flags win.";

struct Flags {
    std::string config;
    std::string backend_url;
    std::string input;
    std::string gold;
    std::string out;
    std::string transcripts;
    std::string sparql_endpoint;
    std::optional<int> hops;
    std::optional<double> threshold;
    std::optional<std::int64_t> seed;
    std::optional<int> parallel;
    std::optional<int> steps;
    std::optional<double> learning_rate;
    std::size_t seed_limit = 50;
    std::size_t neighbors = 5;
    bool no_transcripts = false;
    std::string date;
};

void add_common(CLI::App& cmd, Flags& f) {
    cmd.add_option("--config", f.config, "JSON run configuration");
    cmd.add_option("--backend-url", f.backend_url,
                   "OpenAI-compatible endpoint; replaces every configured backend");
    cmd.add_option("--out", f.out, "Output path");
    cmd.add_option("--hops", f.hops, "Target hop count")->check(CLI::Range(1, 5));
    cmd.add_option("--threshold", f.threshold,
                   "generate: repetition guard; evaluate: single repetition threshold");
    cmd.add_option("--seed", f.seed, "Decoding and training seed");
    cmd.add_option("--parallel", f.parallel, "Samples processed concurrently");
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::config: return kConfig;
    case ErrorKind::backend_unavailable:
    case ErrorKind::protocol:
    case ErrorKind::fixture_missing: return kBackend;
    default: return kFailure;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write " + path);
    }
    out << content;
    if (!out) {
        throw Error(ErrorKind::io, "write failed for " + path);
    }
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) {
        throw Error(ErrorKind::config, std::string("missing required ") + flag);
    }
}

std::string default_transcript_path(const std::string& out) {
    std::filesystem::path p(out);
    return (p.parent_path() / (p.stem().string() + ".transcripts.jsonl")).string();
}

RunConfig resolve_config(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (!f.backend_url.empty()) {
        HttpSettings http;
        http.endpoint = f.backend_url;
        http.model = c.model;
        for (auto* slot : {&c.generation_backend, &c.extraction_backend, &c.construction_backend}) {
            if (*slot) {
                if (auto* existing = std::get_if<HttpSettings>(&**slot)) {
                    HttpSettings merged = *existing;
                    merged.endpoint = f.backend_url;
                    *slot = merged;
                    continue;
                }
            }
            *slot = http;
        }
        try {
            parse_endpoint(f.backend_url);
        } catch (const Error& e) {
            throw Error(ErrorKind::config, std::string("--backend-url: ") + e.what());
        }
    }
    if (f.hops) c.target_hops = *f.hops;
    if (f.threshold) c.repetition_threshold = *f.threshold;
    if (f.parallel) c.parallel = *f.parallel;
    if (f.seed) {
        c.seed = *f.seed;
        c.generation.seed = c.extraction.seed = c.construction.seed = *f.seed;
    }
    if (f.steps) c.train_steps = *f.steps;
    if (f.learning_rate) c.learning_rate = *f.learning_rate;
    c.validate();
    return c;
}

std::shared_ptr<const Backend> backend_or_throw(const std::optional<BackendKind>& kind,
                                                const char* stage) {
    if (!kind) {
        throw Error(ErrorKind::config, std::string("no ") + stage +
                                           " backend configured (set it in --config or pass --backend-url)");
    }
    try {
        return make_backend(*kind);
    } catch (const Error& e) {
        throw Error(ErrorKind::config, e.what());
    }
}

std::vector<std::pair<std::size_t, RuleChain>> read_chains(const std::string& path) {
    std::vector<std::pair<std::size_t, RuleChain>> chains;
    const auto text = read_file(path);
    std::size_t line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        try {
            auto j = Json::parse(line);
            if (j.contains("provenance")) {
                continue;
            }
            if (j.contains("chain")) {
                chains.emplace_back(j.value("sample", chains.size()), chain_from_json(j.at("chain")));
            } else if (j.contains("gold_chain")) {
                chains.emplace_back(chains.size(), sample_from_json(j).gold_chain);
            } else {
                chains.emplace_back(chains.size(), chain_from_json(j));
            }
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::parse, path + " line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::parse, path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::stable_sort(chains.begin(), chains.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return chains;
}

int run_generate(const Flags& f, std::ostream& out, std::ostream& err) {
    require(f.input, "--input");
    require(f.out, "--out");
    const auto cfg = resolve_config(f);

    PipelineConfig pipeline;
    pipeline.max_hops = cfg.max_hops;
    pipeline.repetition_threshold = cfg.repetition_threshold;
    pipeline.min_overlap = cfg.min_overlap;
    pipeline.lambda = cfg.lambda;
    pipeline.generation = cfg.generation;
    pipeline.extraction = cfg.extraction;
    pipeline.generation_backend = backend_or_throw(cfg.generation_backend, "generation");
    pipeline.extraction_backend = backend_or_throw(cfg.extraction_backend, "extraction");
    pipeline.scorer = cfg.scorer_path ? std::make_shared<const Scorer>(load_scorer(*cfg.scorer_path))
                                      : std::make_shared<const Scorer>(default_feature_map());
    if (cfg.reference_scorer_path) {
        pipeline.reference_scorer = std::make_shared<const Scorer>(load_scorer(*cfg.reference_scorer_path));
    }
    if (cfg.stopwords_path) {
        pipeline.stopwords = std::make_shared<const StopwordSet>(load_stopwords(*cfg.stopwords_path));
    }

    const auto dataset = read_dataset(f.input);
    std::vector<ChainJob> jobs;
    for (const auto& sample : dataset.samples) {
        int target = cfg.target_hops.value_or(
            sample.gold_chain.size() > 0 ? static_cast<int>(sample.gold_chain.size())
                                         : sample.gold_chain.target_hops());
        if (target > cfg.max_hops) {
            throw Error(ErrorKind::config, "sample asks for " + std::to_string(target) +
                                               " hops, above max_hops " + std::to_string(cfg.max_hops));
        }
        jobs.push_back(ChainJob{sample.typing, sample.gold_chain.premise(), target});
    }
    pipeline.target_hops = jobs.empty() ? 1 : jobs.front().target_hops;
    pipeline.validate();

    const auto results = run_batch(jobs, pipeline, cfg.parallel);

    std::string chains;
    std::string transcripts;
    std::size_t complete = 0, partial = 0, failed = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        chains += chain_record(i, results[i].chain).dump() + '\n';
        for (const auto& hop : results[i].hops) {
            transcripts += hop_record(i, hop).dump() + '\n';
        }
        transcripts += chain_record(i, results[i].chain).dump() + '\n';
        switch (results[i].chain.status()) {
        case ChainStatus::complete: ++complete; break;
        case ChainStatus::partial_failure: ++partial; break;
        case ChainStatus::failure: ++failed; break;
        }
    }
    write_file(f.out, chains);
    if (!f.no_transcripts) {
        write_file(f.transcripts.empty() ? default_transcript_path(f.out) : f.transcripts, transcripts);
    }
    out << "generated " << results.size() << " chains: " << complete << " complete, " << partial
        << " partial failure, " << failed << " failure\n";
    (void)err;
    return kOk;
}

int run_evaluate(const Flags& f, std::ostream& out, std::ostream&) {
    require(f.input, "--input");
    require(f.gold, "--gold");
    auto cfg = resolve_config(f);
    std::vector<double> thresholds = cfg.thresholds;
    if (f.threshold) {
        if (!(*f.threshold > 0.0 && *f.threshold <= 1.0)) {
            throw Error(ErrorKind::config, "--threshold must lie in (0,1]");
        }
        thresholds = {*f.threshold};
    }

    std::vector<RuleChain> generated;
    for (auto& [index, chain] : read_chains(f.input)) {
        generated.push_back(std::move(chain));
    }
    std::vector<RuleChain> gold;
    for (const auto& sample : read_dataset(f.gold).samples) {
        gold.push_back(sample.gold_chain);
    }
    const auto report = evaluate(generated, gold, thresholds);
    out << render_report_table(report);
    if (!f.out.empty()) {
        write_file(f.out, report_to_json(report).dump(2) + '\n');
    }
    return kOk;
}

int run_train(const Flags& f, std::ostream& out, std::ostream&) {
    require(f.input, "--input");
    require(f.out, "--out");
    const auto cfg = resolve_config(f);
    const auto features = default_feature_map();

    std::vector<TrainingExample> examples;
    std::istringstream in(read_file(f.input));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        try {
            auto j = Json::parse(line);
            std::vector<std::string> items;
            if (j.contains("items")) {
                items = j.at("items").get<std::vector<std::string>>();
            } else {
                auto typing = typing_from_json(j.at("entity_types"));
                std::vector<Atom> premises;
                for (const auto& p : j.at("premises")) {
                    premises.push_back(atom_from_json(p));
                }
                for (const auto& h : j.at("ranked")) {
                    items.push_back(render_ranking_statement(typing, premises, atom_from_json(h)));
                }
            }
            examples.push_back(make_training_example(RankedList(std::move(items)), *features));
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::parse, f.input + " line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::parse, f.input + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }

    TrainingOptions options;
    options.steps = cfg.train_steps;
    options.learning_rate = cfg.learning_rate;
    options.seed = static_cast<std::uint64_t>(cfg.seed.value_or(0));
    TrainingTrace trace;
    const auto scorer = train_pairwise_scorer(examples, options, features, &trace);
    save_scorer(scorer, f.out);
    out << "trained on " << examples.size() << " ranked lists, " << trace.steps
        << " steps: mean loss " << trace.initial_loss << " -> " << trace.final_loss << '\n';
    return kOk;
}

struct Seed {
    EntityTyping typing;
    Atom premise;
    int hops;
};

int run_dataset_build(const Flags& f, std::ostream& out, std::ostream& err) {
    require(f.out, "--out");
    if (f.input.empty() == f.sparql_endpoint.empty()) {
        throw Error(ErrorKind::config, "dataset-build needs exactly one of --input or --sparql-endpoint");
    }
    const auto cfg = resolve_config(f);
    const auto backend = backend_or_throw(cfg.construction_backend, "construction");
    const auto templates = cfg.templates_dir ? ConstructionTemplates::load(*cfg.templates_dir)
                                             : ConstructionTemplates::defaults();
    const int default_hops = cfg.target_hops.value_or(3);

    std::vector<Seed> seeds;
    std::string source = "seed file";
    if (!f.input.empty()) {
        std::istringstream in(read_file(f.input));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) {
                continue;
            }
            try {
                auto j = Json::parse(line);
                int hops = f.hops ? *f.hops : j.value("hops", default_hops);
                seeds.push_back(Seed{typing_from_json(j.at("entity_types")),
                                     atom_from_json(j.at("premise")), hops});
            } catch (const Json::exception& e) {
                throw Error(ErrorKind::parse, f.input + " line " + std::to_string(line_no) + ": " + e.what());
            } catch (const Error& e) {
                throw Error(ErrorKind::parse, f.input + " line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    } else {
        source = "Freebase via " + f.sparql_endpoint;
        SparqlClient client(SparqlSettings{f.sparql_endpoint});
        for (const auto& pair : harvest_pairs(client, f.seed_limit, f.neighbors)) {
            auto [typing, premise] = premise_from_pair(pair);
            seeds.push_back(Seed{typing, premise, default_hops});
        }
    }

    std::vector<std::optional<ConstructionResult>> results(seeds.size());
    std::optional<std::pair<std::size_t, ConstructionError>> failure;
    {
        std::mutex failure_mutex;
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < seeds.size(); i = next++) {
                try {
                    results[i] = construct_sample(seeds[i].typing, seeds[i].premise, seeds[i].hops,
                                                  *backend, templates, cfg.construction);
                } catch (const ConstructionError& e) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure || i < failure->first) {
                        failure.emplace(i, e);
                    }
                }
            }
        };
        const auto threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.parallel), seeds.size());
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        worker();
    }

    const std::string transcript_path =
        f.transcripts.empty() ? default_transcript_path(f.out) : f.transcripts;
    std::string transcripts;
    DatasetFile dataset;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (failure && i == failure->first) {
            transcripts += transcript_record(i, failure->second.transcript(),
                                             std::string("aborted: ") + failure->second.what())
                               .dump() +
                           '\n';
            break;
        }
        if (!results[i]) {
            continue;
        }
        if (results[i]->warning) {
            err << "warning: sample " << i << ": " << *results[i]->warning << '\n';
        }
        transcripts += transcript_record(i, *results[i]).dump() + '\n';
        dataset.samples.push_back(results[i]->sample);
    }
    if (!f.no_transcripts) {
        write_file(transcript_path, transcripts);
    }
    if (failure) {
        throw Error(failure->second.kind(),
                    "sample " + std::to_string(failure->first) + ": " + failure->second.what());
    }
    dataset.provenance =
        Provenance{source, backend->describe(), f.date, dataset.samples.size()};
    write_dataset(dataset, f.out);
    out << "built " << dataset.samples.size() << " samples\n";
    return kOk;
}

int run_dataset_validate(const Flags& f, std::ostream& out, std::ostream&) {
    require(f.input, "--input");
    const auto report = validate_dataset(read_file(f.input));
    out << "samples: " << report.total_samples << "  valid: " << report.valid_samples
        << "  distinct premise atoms: " << report.distinct_premise_atoms << '\n';
    out << "hop distribution:";
    for (const auto& [hops, count] : report.hop_distribution) {
        out << ' ' << hops << ':' << count;
    }
    out << '\n';
    for (const auto& check : report.checks) {
        for (const auto& reason : check.reasons) {
            out << "line " << check.line << ": " << reason << '\n';
        }
    }
    for (const auto& problem : report.file_problems) {
        out << problem << '\n';
    }
    if (!f.out.empty()) {
        write_file(f.out, validation_report_to_json(report).dump(2) + '\n');
    }
    return report.ok() ? kOk : kFailure;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{std::string("Multi-hop open rule chain generation and evaluation.\n") + kPrecedence,
                 "rulechain"};
    app.require_subcommand(1);
    Flags f;

    auto* generate = app.add_subcommand("generate", "Run the multi-hop pipeline over a sample file");
    add_common(*generate, f);
    generate->add_option("--input", f.input, "Dataset JSONL whose premises and types seed each chain");
    generate->add_option("--transcripts", f.transcripts, "Hop transcript path");
    generate->add_flag("--no-transcripts", f.no_transcripts, "Skip writing hop transcripts");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score chains against gold chains");
    add_common(*evaluate_cmd, f);
    evaluate_cmd->add_option("--input", f.input, "Chains JSONL (generate output or a dataset file)");
    evaluate_cmd->add_option("--gold", f.gold, "Dataset JSONL with gold chains");

    auto* train = app.add_subcommand("train-scorer", "Fit the pairwise statement scorer");
    add_common(*train, f);
    train->add_option("--input", f.input, "Ranked lists JSONL");
    train->add_option("--steps", f.steps, "Gradient steps");
    train->add_option("--lr", f.learning_rate, "Learning rate");

    auto* build = app.add_subcommand("dataset-build", "Construct samples with the three-round protocol");
    add_common(*build, f);
    build->add_option("--input", f.input, "Seed JSONL: {premise, entity_types, hops}");
    build->add_option("--sparql-endpoint", f.sparql_endpoint, "Harvest seeds from a SPARQL service");
    build->add_option("--seed-limit", f.seed_limit, "Seed entities to query");
    build->add_option("--neighbors", f.neighbors, "Neighbors per seed entity");
    build->add_option("--date", f.date, "Date recorded in the provenance header");
    build->add_option("--transcripts", f.transcripts, "Transcript path");
    build->add_flag("--no-transcripts", f.no_transcripts, "Skip writing transcripts");

    auto* validate = app.add_subcommand("dataset-validate", "Check a dataset file");
    add_common(*validate, f);
    validate->add_option("--input", f.input, "Dataset JSONL");

    std::vector<const char*> argv{"rulechain"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (generate->parsed()) return run_generate(f, out, err);
        if (evaluate_cmd->parsed()) return run_evaluate(f, out, err);
        if (train->parsed()) return run_train(f, out, err);
        if (build->parsed()) return run_dataset_build(f, out, err);
        if (validate->parsed()) return run_dataset_validate(f, out, err);
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error [internal]: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}

} // namespace rulechain::cli
