#include "rulechain/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rulechain/extraction.hpp"

namespace rulechain {

namespace {

Json provenance_to_json(const Provenance& p) {
    Json j;
    j["source_kb"] = p.source_kb;
    j["construction_backend"] = p.construction_backend;
    j["date"] = p.date;
    j["sample_count"] = p.sample_count;
    return j;
}

Provenance provenance_from_json(const Json& j) {
    Provenance p;
    p.source_kb = j.value("source_kb", "");
    p.construction_backend = j.value("construction_backend", "");
    p.date = j.value("date", "");
    p.sample_count = j.value("sample_count", std::size_t{0});
    return p;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        auto line = text.substr(start, end - start);
        start = end + 1;
        if (!trim(line).empty()) {
            fn(line_no, line);
        }
    }
}

Json parse_line_json(std::size_t line_no, std::string_view line) {
    try {
        return Json::parse(line);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
}

bool is_provenance_line(const Json& j) {
    return j.is_object() && j.contains("provenance");
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

} // namespace

std::string serialize_dataset(const DatasetFile& file) {
    std::string out;
    if (file.provenance) {
        Json header;
        header["provenance"] = provenance_to_json(*file.provenance);
        out += header.dump() + '\n';
    }
    for (const auto& sample : file.samples) {
        out += to_json(sample).dump() + '\n';
    }
    return out;
}

DatasetFile parse_dataset(std::string_view text) {
    DatasetFile file;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto j = parse_line_json(line_no, line);
        if (is_provenance_line(j)) {
            file.provenance = provenance_from_json(j.at("provenance"));
            return;
        }
        try {
            file.samples.push_back(sample_from_json(j));
        } catch (const Error& e) {
            throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + e.what());
        }
    });
    return file;
}

void write_dataset(const DatasetFile& file, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write " + path);
    }
    out << serialize_dataset(file);
}

DatasetFile read_dataset(const std::string& path) {
    return parse_dataset(read_file(path));
}

ValidationReport validate_dataset(std::string_view text) {
    ValidationReport report;
    std::set<std::string> premise_keys;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto j = parse_line_json(line_no, line);
        if (is_provenance_line(j)) {
            if (report.recorded_count) {
                report.file_problems.push_back("line " + std::to_string(line_no) +
                                               ": second provenance record");
            }
            report.recorded_count = j.at("provenance").value("sample_count", std::size_t{0});
            return;
        }
        ++report.total_samples;
        SampleCheck check{line_no, {}};
        try {
            auto sample = sample_from_json(j);
            check.reasons = sample.violations();
            if (check.ok()) {
                Json key = Json::array();
                for (const auto& p : sample.premise_atoms) {
                    key.push_back(to_json(p));
                }
                premise_keys.insert(key.dump());
                ++report.hop_distribution[sample.gold_chain.size()];
            }
        } catch (const Error& e) {
            check.reasons.emplace_back(e.what());
        } catch (const Json::exception& e) {
            check.reasons.emplace_back(e.what());
        }
        if (check.ok()) {
            ++report.valid_samples;
        }
        report.checks.push_back(std::move(check));
    });
    report.distinct_premise_atoms = premise_keys.size();
    if (report.recorded_count && *report.recorded_count != report.total_samples) {
        report.file_problems.push_back("provenance records " + std::to_string(*report.recorded_count) +
                                       " samples but the file holds " +
                                       std::to_string(report.total_samples));
    }
    return report;
}

Json validation_report_to_json(const ValidationReport& report) {
    Json j;
    j["ok"] = report.ok();
    j["total_samples"] = report.total_samples;
    j["valid_samples"] = report.valid_samples;
    j["distinct_premise_atoms"] = report.distinct_premise_atoms;
    Json hops = Json::object();
    for (const auto& [h, n] : report.hop_distribution) {
        hops[std::to_string(h)] = n;
    }
    j["hop_distribution"] = std::move(hops);
    j["recorded_count"] = report.recorded_count ? Json(*report.recorded_count) : Json(nullptr);
    j["file_problems"] = report.file_problems;
    Json failures = Json::array();
    for (const auto& c : report.checks) {
        if (!c.ok()) {
            failures.push_back(Json{{"line", c.line}, {"reasons", c.reasons}});
        }
    }
    j["failures"] = std::move(failures);
    return j;
}

ConstructionTemplates ConstructionTemplates::defaults() {
    return ConstructionTemplates{PromptTemplate(kGenerationTemplate),
                                 PromptTemplate(kExtractionTemplate),
                                 PromptTemplate(kConstructionRankingTemplate)};
}

ConstructionTemplates ConstructionTemplates::load(const std::string& dir) {
    const std::filesystem::path base(dir);
    return ConstructionTemplates{load_template((base / "generation.txt").string()),
                                 load_template((base / "extraction.txt").string()),
                                 load_template((base / "ranking.txt").string())};
}

ConstructionError::ConstructionError(const Error& cause, std::vector<TranscriptEntry> transcript)
    : Error(cause.kind(), cause.what()), transcript_(std::move(transcript)) {}

ConstructionResult construct_sample(const EntityTyping& typing, const Atom& premise, int hops,
                                    const Backend& backend, const ConstructionTemplates& templates,
                                    const StageDecoding& decoding) {
    if (hops < kMinSampleHops || hops > kMaxSampleHops) {
        throw invalid_input("construct_sample: hops must lie in [1,5], got " + std::to_string(hops));
    }
    ConstructionResult result{Sample{{premise}, typing, RuleChain(premise, hops)}, {}, std::nullopt};
    std::vector<Atom> premises{premise};

    auto ask = [&](int hop, int round, std::string prompt) -> std::string {
        std::string completion;
        try {
            completion = backend.complete(decoding.request(prompt));
        } catch (const Error& e) {
            throw ConstructionError(
                Error(e.kind(), "hop " + std::to_string(hop) + " round " + std::to_string(round) +
                                    ": " + e.what()),
                result.transcript);
        }
        result.transcript.push_back(TranscriptEntry{hop, round, std::move(prompt), completion});
        return completion;
    };

    for (int hop = 1; hop <= hops; ++hop) {
        const std::string joined = join_premises(premises);
        auto text = ask(hop, 1,
                        templates.generation.render(
                            {{"type_a", typing.type_a()}, {"type_b", typing.type_b()}, {"premises", joined}}));
        if (trim(text).empty()) {
            result.warning = "hop " + std::to_string(hop) + ": generation round returned no text";
            break;
        }
        auto extracted = parse_candidates(ask(hop, 2, templates.extraction.render({{"text", text}})), text);
        if (extracted.candidates.empty()) {
            result.warning = "hop " + std::to_string(hop) + ": extraction round yielded no candidates";
            break;
        }
        auto candidate_lines = render_candidate_lines(extracted.candidates);
        candidate_lines.pop_back();
        auto ranked = parse_candidates(ask(hop, 3,
                                           templates.ranking.render({{"type_a", typing.type_a()},
                                                                     {"type_b", typing.type_b()},
                                                                     {"premises", joined},
                                                                     {"candidates", candidate_lines}})));
        if (ranked.candidates.empty()) {
            result.warning = "hop " + std::to_string(hop) + ": ranking round yielded no atom";
            break;
        }
        const Atom& top = ranked.candidates.front();
        result.sample.gold_chain = append_hypothesis(result.sample.gold_chain, top);
        premises.push_back(top);
    }
    return result;
}

Json transcript_record(std::size_t sample, const std::vector<TranscriptEntry>& transcript,
                       const std::optional<std::string>& warning) {
    Json j;
    j["sample"] = sample;
    Json calls = Json::array();
    for (const auto& t : transcript) {
        Json c;
        c["hop"] = t.hop;
        c["round"] = t.round;
        c["prompt"] = t.prompt;
        c["completion"] = t.completion;
        calls.push_back(std::move(c));
    }
    j["calls"] = std::move(calls);
    j["warning"] = warning ? Json(*warning) : Json(nullptr);
    return j;
}

Json transcript_record(std::size_t sample, const ConstructionResult& result) {
    return transcript_record(sample, result.transcript, result.warning);
}

} // namespace rulechain
