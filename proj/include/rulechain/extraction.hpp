#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rulechain/core.hpp"

namespace rulechain {

struct ExtractionDiagnostics {
    std::size_t lines_seen = 0;  // nonblank lines
    std::size_t lines_parsed = 0;
    std::size_t duplicates_dropped = 0;
    std::size_t unfaithful_dropped = 0;
};

/// Candidate hypothesis atoms pulled from one generation-stage text.
/// Relations are pairwise distinct after whitespace and case normalization.
struct CandidateSet {
    std::vector<Atom> candidates;
    std::string source_text;
    ExtractionDiagnostics diagnostics;
};

inline constexpr std::string_view kExtractionTemplate =
    "Extract the relationships between A and B that are stated in the text below. "
    "Write one relationship per line in the form \"<A> relation <B>\" and nothing else.\n"
    "\n"
    "Text: {text}";

std::string render_extraction_prompt(std::string_view generated_text);

// Never throws on model output: lines that do not match the atom grammar are
// skipped and show up as (lines_seen - lines_parsed - duplicates_dropped).
CandidateSet parse_candidates(std::string_view model_output, std::string source_text = {});

/// Canonical one-atom-per-line rendering; parse_candidates inverts it.
std::string render_candidate_lines(const std::vector<Atom>& atoms);

using StopwordSet = std::set<std::string, std::less<>>;

const StopwordSet& default_stopwords();

// Reads one stopword per line; blank lines and '#' comments are ignored.
StopwordSet load_stopwords(const std::string& path);

/// Lowercased relation tokens minus stopwords; "'s" is split off as its own token.
std::vector<std::string> content_tokens(std::string_view text, const StopwordSet& stopwords);

/// Fraction of the relation's content tokens present in `source`; 1 when the
/// relation has no content tokens.
double relation_overlap(const Atom& atom, std::string_view source, const StopwordSet& stopwords);

CandidateSet faithfulness_filter(const CandidateSet& set, double min_overlap,
                                 const StopwordSet& stopwords = default_stopwords());

} // namespace rulechain
