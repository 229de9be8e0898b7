#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rulechain/backend.hpp"
#include "rulechain/core.hpp"
#include "rulechain/pipeline.hpp"
#include "rulechain/template.hpp"

namespace rulechain {

struct Provenance {
    std::string source_kb;
    std::string construction_backend;
    std::string date;
    std::size_t sample_count = 0;
};

/// JSON lines: an optional leading {"provenance": {...}} line, then one Sample per line.
struct DatasetFile {
    std::optional<Provenance> provenance;
    std::vector<Sample> samples;
};

std::string serialize_dataset(const DatasetFile& file);

// Strict reader: throws Error(parse) naming the line of the first malformed
// JSON line or sample.
DatasetFile parse_dataset(std::string_view text);

void write_dataset(const DatasetFile& file, const std::string& path);
DatasetFile read_dataset(const std::string& path);

struct SampleCheck {
    std::size_t line = 0;
    std::vector<std::string> reasons;
    bool ok() const { return reasons.empty(); }
};

struct ValidationReport {
    std::vector<SampleCheck> checks;
    std::size_t total_samples = 0;
    std::size_t valid_samples = 0;
    std::size_t distinct_premise_atoms = 0;
    std::map<std::size_t, std::size_t> hop_distribution;  // valid samples only
    std::optional<std::size_t> recorded_count;
    std::vector<std::string> file_problems;

    bool ok() const { return valid_samples == total_samples && file_problems.empty(); }
};

/// Checks every sample and collects aggregate counts. Only malformed JSON is
/// fatal (Error(parse) with the line number); schema problems are reported per sample.
ValidationReport validate_dataset(std::string_view text);

Json validation_report_to_json(const ValidationReport& report);

/// The three prompts of the construction protocol: generation (G), extraction
/// (E) and ranking (R). Slots:
///   G: {type_a} {type_b} {premises}
///   E: {text}
///   R: {type_a} {type_b} {premises} {candidates}
struct ConstructionTemplates {
    PromptTemplate generation;
    PromptTemplate extraction;
    PromptTemplate ranking;

    static ConstructionTemplates defaults();
    /// Reads generation.txt, extraction.txt and ranking.txt from `dir`.
    static ConstructionTemplates load(const std::string& dir);
};

inline constexpr std::string_view kConstructionRankingTemplate =
    "If A is {type_a}, B is {type_b}, {premises}. Rank the following relationships between A "
    "and B based on the probability of their actual occurrence, most probable first. Write one "
    "relationship per line in the form \"<A> relation <B>\" and nothing else.\n"
    "\n"
    "{candidates}";

struct TranscriptEntry {
    int hop = 0;
    int round = 0;  // 1 = generation, 2 = extraction, 3 = ranking
    std::string prompt;
    std::string completion;
};

struct ConstructionResult {
    Sample sample;
    std::vector<TranscriptEntry> transcript;
    std::optional<std::string> warning;
};

class ConstructionError : public Error {
public:
    ConstructionError(const Error& cause, std::vector<TranscriptEntry> transcript);
    const std::vector<TranscriptEntry>& transcript() const noexcept { return transcript_; }

private:
    std::vector<TranscriptEntry> transcript_;
};

/// Runs generation, extraction and ranking rounds per hop, appending the
/// ranker's first parseable atom, until `hops` atoms are collected or a round
/// yields nothing (the shorter chain is returned with a warning).
ConstructionResult construct_sample(const EntityTyping& typing, const Atom& premise, int hops,
                                    const Backend& backend, const ConstructionTemplates& templates,
                                    const StageDecoding& decoding = {});

Json transcript_record(std::size_t sample, const ConstructionResult& result);
Json transcript_record(std::size_t sample, const std::vector<TranscriptEntry>& transcript,
                       const std::optional<std::string>& warning);

} // namespace rulechain
