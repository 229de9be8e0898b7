#include "rulechain/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "rulechain/text.hpp"

namespace rulechain {

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int k) {
    NgramCounts counts;
    if (tokens.size() < static_cast<std::size_t>(k)) {
        return counts;
    }
    for (std::size_t i = 0; i + k <= tokens.size(); ++i) {
        std::string key;
        for (int j = 0; j < k; ++j) {
            key += tokens[i + j];
            key += '\x1f';
        }
        ++counts[key];
    }
    return counts;
}

void check_n(int n) {
    if (n < 1 || n > 4) {
        throw invalid_input("bleu: n must be in [1,4], got " + std::to_string(n));
    }
}

} // namespace

double corpus_bleu(std::span<const std::string> candidates,
                   std::span<const std::vector<std::string>> references, int n) {
    check_n(n);
    if (candidates.empty()) {
        throw invalid_input("bleu: empty corpus");
    }
    if (candidates.size() != references.size()) {
        throw invalid_input("bleu: candidate and reference lists differ in length");
    }

    std::vector<double> matched(n, 0.0);
    std::vector<double> total(n, 0.0);
    double cand_len = 0.0;
    double ref_len = 0.0;

    for (std::size_t s = 0; s < candidates.size(); ++s) {
        const auto cand = tokenize(candidates[s]);
        std::vector<std::vector<std::string>> refs;
        for (const auto& r : references[s]) {
            refs.push_back(tokenize(r));
        }
        cand_len += static_cast<double>(cand.size());

        if (!refs.empty()) {
            std::size_t closest = refs.front().size();
            for (const auto& r : refs) {
                auto diff = [&](std::size_t len) {
                    return len > cand.size() ? len - cand.size() : cand.size() - len;
                };
                if (diff(r.size()) < diff(closest) ||
                    (diff(r.size()) == diff(closest) && r.size() < closest)) {
                    closest = r.size();
                }
            }
            ref_len += static_cast<double>(closest);
        }

        for (int k = 1; k <= n; ++k) {
            const auto cand_counts = count_ngrams(cand, k);
            NgramCounts max_ref;
            for (const auto& r : refs) {
                for (const auto& [gram, c] : count_ngrams(r, k)) {
                    auto& slot = max_ref[gram];
                    slot = std::max(slot, c);
                }
            }
            for (const auto& [gram, c] : cand_counts) {
                total[k - 1] += static_cast<double>(c);
                if (auto it = max_ref.find(gram); it != max_ref.end()) {
                    matched[k - 1] += static_cast<double>(std::min(c, it->second));
                }
            }
        }
    }

    double log_sum = 0.0;
    for (int k = 0; k < n; ++k) {
        if (total[k] == 0.0 || matched[k] == 0.0) {
            return 0.0;
        }
        log_sum += std::log(matched[k] / total[k]);
    }
    const double brevity = cand_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / cand_len);
    return std::clamp(brevity * std::exp(log_sum / n), 0.0, 1.0);
}

double bleu_n(std::span<const std::string> candidates, std::span<const std::string> references, int n) {
    if (candidates.size() != references.size()) {
        throw invalid_input("bleu: candidate and reference lists differ in length");
    }
    std::vector<std::vector<std::string>> refs;
    refs.reserve(references.size());
    for (const auto& r : references) {
        refs.push_back({r});
    }
    return corpus_bleu(candidates, refs, n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_l_pair(std::string_view candidate, std::string_view reference) {
    const auto cand = tokenize(candidate);
    const auto ref = tokenize(reference);
    const auto lcs = static_cast<double>(lcs_length(cand, ref));
    if (lcs == 0.0) {
        return 0.0;
    }
    const double p = lcs / static_cast<double>(cand.size());
    const double r = lcs / static_cast<double>(ref.size());
    return 2.0 * p * r / (p + r);
}

double rouge_l(std::span<const std::string> candidates, std::span<const std::string> references) {
    if (candidates.empty()) {
        throw invalid_input("rouge_l: empty corpus");
    }
    if (candidates.size() != references.size()) {
        throw invalid_input("rouge_l: candidate and reference lists differ in length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        sum += rouge_l_pair(candidates[i], references[i]);
    }
    return sum / static_cast<double>(candidates.size());
}

double self_bleu2(std::span<const std::string> texts) {
    if (texts.size() < 2) {
        throw invalid_input("self_bleu2: need at least two texts");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        std::vector<std::string> others;
        for (std::size_t j = 0; j < texts.size(); ++j) {
            if (j != i) {
                others.push_back(texts[j]);
            }
        }
        const std::vector<std::vector<std::string>> refs{std::move(others)};
        sum += corpus_bleu(texts.subspan(i, 1), refs, 2);
    }
    return sum / static_cast<double>(texts.size());
}

double jaccard(std::string_view a, std::string_view b) {
    const auto ta = tokenize(a);
    const auto tb = tokenize(b);
    const std::unordered_set<std::string> sa(ta.begin(), ta.end());
    const std::unordered_set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) {
        return 1.0;
    }
    std::size_t shared = 0;
    for (const auto& t : sa) {
        shared += sb.contains(t) ? 1 : 0;
    }
    return static_cast<double>(shared) / static_cast<double>(sa.size() + sb.size() - shared);
}

double max_jaccard(std::string_view text, std::span<const std::string> others) {
    double best = 0.0;
    for (const auto& o : others) {
        best = std::max(best, jaccard(text, o));
    }
    return best;
}

double repetition_rate(std::span<const RuleChain> chains, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw invalid_input("repetition_rate: threshold must lie in (0,1]");
    }
    std::size_t duplicates = 0;
    std::size_t total = 0;
    for (const auto& chain : chains) {
        std::vector<std::string> earlier{chain.premise().plain_form()};
        for (const auto& h : chain.hypotheses()) {
            auto text = h.plain_form();
            if (max_jaccard(text, earlier) >= threshold) {
                ++duplicates;
            }
            ++total;
            earlier.push_back(std::move(text));
        }
    }
    if (total == 0) {
        throw invalid_input("repetition_rate: no hypothesis atoms to score");
    }
    return static_cast<double>(duplicates) / static_cast<double>(total);
}

ChainLengthStats chain_length_stats(std::span<const RuleChain> chains) {
    ChainLengthStats stats;
    for (const auto& chain : chains) {
        switch (chain.status()) {
        case ChainStatus::failure: ++stats.zero_count; break;
        case ChainStatus::partial_failure: ++stats.partial_count; break;
        case ChainStatus::complete: break;
        }
        if (chain.size() > 0) {
            ++stats.histogram[chain.size()];
        }
    }
    return stats;
}

EvalReport evaluate(std::span<const RuleChain> generated, std::span<const RuleChain> gold,
                    std::span<const double> thresholds) {
    if (generated.size() != gold.size()) {
        throw invalid_input("evaluate: " + std::to_string(generated.size()) + " chains vs " +
                            std::to_string(gold.size()) + " gold chains");
    }
    if (generated.empty()) {
        throw invalid_input("evaluate: no chains");
    }

    std::vector<std::string> cands;
    std::vector<std::string> refs;
    EvalReport report;
    double self_sum = 0.0;
    for (std::size_t c = 0; c < generated.size(); ++c) {
        const auto& g = generated[c].hypotheses();
        const auto& r = gold[c].hypotheses();
        for (std::size_t i = 0; i < std::max(g.size(), r.size()); ++i) {
            cands.push_back(i < g.size() ? g[i].mask_form() : std::string());
            refs.push_back(i < r.size() ? r[i].mask_form() : std::string());
        }
        report.generated_atoms += g.size();
        if (g.size() >= 2) {
            std::vector<std::string> texts;
            for (const auto& h : g) {
                texts.push_back(h.mask_form());
            }
            self_sum += self_bleu2(texts);
            ++report.self_bleu_chains;
        }
    }
    if (cands.empty()) {
        throw invalid_input("evaluate: neither side has any hypothesis atoms");
    }

    report.bleu1 = bleu_n(cands, refs, 1);
    report.bleu2 = bleu_n(cands, refs, 2);
    report.bleu4 = bleu_n(cands, refs, 4);
    report.rouge_l = rouge_l(cands, refs);
    report.self_bleu2 =
        report.self_bleu_chains > 0 ? self_sum / static_cast<double>(report.self_bleu_chains) : 0.0;
    for (double t : thresholds) {
        report.repetition_rate_by_threshold[t] =
            report.generated_atoms > 0 ? repetition_rate(generated, t) : 0.0;
    }
    report.lengths = chain_length_stats(generated);
    return report;
}

Json report_to_json(const EvalReport& report) {
    Json j;
    j["bleu1"] = report.bleu1;
    j["bleu2"] = report.bleu2;
    j["bleu4"] = report.bleu4;
    j["rouge_l"] = report.rouge_l;
    j["self_bleu2"] = report.self_bleu2;
    j["self_bleu_chains"] = report.self_bleu_chains;
    j["generated_atoms"] = report.generated_atoms;
    Json rep = Json::array();
    for (const auto& [t, rate] : report.repetition_rate_by_threshold) {
        rep.push_back(Json{{"threshold", t}, {"rate", rate}});
    }
    j["repetition_rate_by_threshold"] = std::move(rep);
    Json hist = Json::object();
    for (const auto& [len, count] : report.lengths.histogram) {
        hist[std::to_string(len)] = count;
    }
    j["length_histogram"] = std::move(hist);
    j["zero_length_chains"] = report.lengths.zero_count;
    j["partial_failure_chains"] = report.lengths.partial_count;
    return j;
}

std::string render_report_table(const EvalReport& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%8s %8s %8s %8s %8s\n", "B1", "B2", "B4", "RL", "Self-B2");
    out << line;
    std::snprintf(line, sizeof line, "%8.1f %8.1f %8.1f %8.1f %8.1f\n", report.bleu1 * 100,
                  report.bleu2 * 100, report.bleu4 * 100, report.rouge_l * 100,
                  report.self_bleu2 * 100);
    out << line << '\n';
    out << "Threshold  Repetition\n";
    for (const auto& [t, rate] : report.repetition_rate_by_threshold) {
        std::snprintf(line, sizeof line, "%8.0f%% %10.1f\n", t * 100, rate * 100);
        out << line;
    }
    out << '\n' << "Length  Chains\n";
    for (const auto& [len, count] : report.lengths.histogram) {
        std::snprintf(line, sizeof line, "%6zu  %6zu\n", len, count);
        out << line;
    }
    std::snprintf(line, sizeof line, "zero-length: %zu  partial failure: %zu\n",
                  report.lengths.zero_count, report.lengths.partial_count);
    out << line;
    return out.str();
}

} // namespace rulechain
