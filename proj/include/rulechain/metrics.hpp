#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rulechain/core.hpp"

namespace rulechain {

// All metrics tokenize with rulechain::tokenize (lowercase, whitespace split,
// trailing punctuation stripped).

/// Corpus BLEU with one reference per candidate, no smoothing.
/// Throws invalid_input on an empty or misaligned corpus or n outside [1,4].
double bleu_n(std::span<const std::string> candidates, std::span<const std::string> references, int n);

/// Corpus BLEU where candidate i may have several references. Clip counts use
/// the per-reference maximum; the reference length is the closest one (ties
/// resolved to the shorter).
double corpus_bleu(std::span<const std::string> candidates,
                   std::span<const std::vector<std::string>> references, int n);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// ROUGE-L F1 of a single pair; 0 when the LCS is empty.
double rouge_l_pair(std::string_view candidate, std::string_view reference);

/// Mean pairwise ROUGE-L F1.
double rouge_l(std::span<const std::string> candidates, std::span<const std::string> references);

/// Mean over texts of BLEU-2 against all other texts. Needs >= 2 texts.
double self_bleu2(std::span<const std::string> texts);

/// Token-set Jaccard similarity; 1.0 when both sides are empty.
double jaccard(std::string_view a, std::string_view b);

/// Highest Jaccard between `text` and any of `others`; 0 when `others` is empty.
double max_jaccard(std::string_view text, std::span<const std::string> others);

/// Share of hypothesis atoms whose max Jaccard against an earlier atom of the
/// same chain (premise included) reaches `threshold`. Atoms compare by plain form.
/// Throws invalid_input on threshold outside (0,1] or zero hypothesis atoms.
double repetition_rate(std::span<const RuleChain> chains, double threshold);

struct ChainLengthStats {
    std::map<std::size_t, std::size_t> histogram;  // length -> count, length 0 excluded
    std::size_t zero_count = 0;
    std::size_t partial_count = 0;
};

ChainLengthStats chain_length_stats(std::span<const RuleChain> chains);

struct EvalReport {
    double bleu1 = 0.0;
    double bleu2 = 0.0;
    double bleu4 = 0.0;
    double rouge_l = 0.0;
    double self_bleu2 = 0.0;
    std::size_t self_bleu_chains = 0;  // chains with >= 2 hypotheses that fed self_bleu2
    std::size_t generated_atoms = 0;
    std::map<double, double> repetition_rate_by_threshold;
    ChainLengthStats lengths;
};

/// Scores generated chains against gold chains aligned by index. Hop i is
/// compared with gold hop i in mask form; a hop missing on either side is
/// compared against the empty string.
EvalReport evaluate(std::span<const RuleChain> generated, std::span<const RuleChain> gold,
                    std::span<const double> thresholds);

Json report_to_json(const EvalReport& report);

/// Fixed-width table: B1 B2 B4 RL Self-B2 (x100), then repetition rates and lengths.
std::string render_report_table(const EvalReport& report);

} // namespace rulechain
