#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rulechain/metrics.hpp"
#include "rulechain/text.hpp"

using namespace rulechain;

namespace {

std::string random_sentence(std::mt19937& rng, std::size_t max_len) {
    static const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "the", "cat"};
    std::size_t len = rng() % (max_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
        if (i) s += ' ';
        s += vocab[rng() % vocab.size()];
    }
    return s;
}

Atom xy(const std::string& rel) { return Atom("X", rel, "Y"); }

} // namespace

TEST(Bleu, HandFixtures) {
    std::vector<std::string> c{"the the the"}, r{"the cat"};
    EXPECT_NEAR(bleu_n(c, r, 1), 1.0 / 3.0, 1e-12);
    std::vector<std::string> same{"a b c d e"};
    for (int n = 1; n <= 4; ++n) EXPECT_DOUBLE_EQ(bleu_n(same, same, n), 1.0);
    std::vector<std::string> x{"a b c"}, y{"d e f"};
    EXPECT_EQ(bleu_n(x, y, 1), 0.0);
}

TEST(Bleu, BrevityPenalty) {
    std::vector<std::string> c{"a b"}, r{"a b c d"};
    EXPECT_NEAR(bleu_n(c, r, 1), std::exp(1.0 - 4.0 / 2.0), 1e-12);
}

TEST(Bleu, Errors) {
    std::vector<std::string> a{"x"}, none;
    EXPECT_THROW(bleu_n(none, none, 1), Error);
    EXPECT_THROW(bleu_n(a, none, 1), Error);
    EXPECT_THROW(bleu_n(a, a, 5), Error);
    EXPECT_THROW(bleu_n(a, a, 0), Error);
}

TEST(Bleu, MatchesBruteForceOracle) {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t k = 1 + rng() % 5;
        std::vector<std::string> cands, refs;
        std::vector<oracle::Tokens> ct;
        std::vector<std::vector<oracle::Tokens>> rt;
        for (std::size_t i = 0; i < k; ++i) {
            cands.push_back(random_sentence(rng, 10));
            refs.push_back(random_sentence(rng, 10));
            ct.push_back(tokenize(cands.back()));
            rt.push_back({tokenize(refs.back())});
        }
        for (int n = 1; n <= 4; ++n) {
            EXPECT_NEAR(bleu_n(cands, refs, n), oracle::bleu(ct, rt, n), 1e-12);
        }
    }
}

TEST(Bleu, MultiReferenceMatchesOracle) {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t k = 1 + rng() % 4;
        std::vector<std::string> cands;
        std::vector<std::vector<std::string>> refs;
        std::vector<oracle::Tokens> ct;
        std::vector<std::vector<oracle::Tokens>> rt;
        for (std::size_t i = 0; i < k; ++i) {
            cands.push_back(random_sentence(rng, 8));
            ct.push_back(tokenize(cands.back()));
            refs.emplace_back();
            rt.emplace_back();
            std::size_t m = 1 + rng() % 3;
            for (std::size_t j = 0; j < m; ++j) {
                refs.back().push_back(random_sentence(rng, 8));
                rt.back().push_back(tokenize(refs.back().back()));
            }
        }
        for (int n = 1; n <= 2; ++n) {
            EXPECT_NEAR(corpus_bleu(cands, refs, n), oracle::bleu(ct, rt, n), 1e-12);
        }
    }
}

TEST(Rouge, HandFixture) {
    EXPECT_NEAR(rouge_l_pair("the cat sat", "the cat ate"), 2.0 / 3.0, 1e-12);
    EXPECT_EQ(rouge_l_pair("a b", "c d"), 0.0);
    EXPECT_EQ(rouge_l_pair("", "c d"), 0.0);
}

TEST(Rouge, MatchesBruteForceOracle) {
    std::mt19937 rng(31337);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t k = 1 + rng() % 5;
        std::vector<std::string> cands, refs;
        double expected = 0;
        for (std::size_t i = 0; i < k; ++i) {
            cands.push_back(random_sentence(rng, 10));
            refs.push_back(random_sentence(rng, 10));
            auto a = tokenize(cands.back()), b = tokenize(refs.back());
            EXPECT_EQ(lcs_length(a, b), oracle::lcs(a, b));
            expected += oracle::rouge_l_f1(a, b);
        }
        EXPECT_NEAR(rouge_l(cands, refs), expected / static_cast<double>(k), 1e-12);
    }
}

TEST(Metrics, IdenticalAndDisjointCorpora) {
    std::mt19937 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> c;
        for (int i = 0; i < 3; ++i) c.push_back("w" + std::to_string(trial) + " x y z " + random_sentence(rng, 5));
        for (int n = 1; n <= 4; ++n) EXPECT_DOUBLE_EQ(bleu_n(c, c, n), 1.0);
        EXPECT_DOUBLE_EQ(rouge_l(c, c), 1.0);
        std::vector<std::string> other(c.size(), "qq rr ss tt uu");
        EXPECT_EQ(bleu_n(c, other, 1), 0.0);
        EXPECT_EQ(rouge_l(c, other), 0.0);
    }
}

TEST(Metrics, OutputsInUnitInterval) {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> c{random_sentence(rng, 6), random_sentence(rng, 6)};
        std::vector<std::string> r{random_sentence(rng, 6), random_sentence(rng, 6)};
        for (double v : {bleu_n(c, r, 1), bleu_n(c, r, 2), rouge_l(c, r), jaccard(c[0], r[0])}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(SelfBleu, HandFixture) {
    std::vector<std::string> t{"a b c", "a b d"};
    EXPECT_NEAR(self_bleu2(t), std::sqrt(1.0 / 3.0), 1e-12);
    std::vector<std::string> one{"a"};
    EXPECT_THROW(self_bleu2(one), Error);
}

TEST(Jaccard, Fixtures) {
    EXPECT_NEAR(jaccard("is stop of", "is a stop of"), 0.75, 1e-12);
    EXPECT_EQ(jaccard("a b", "a b"), 1.0);
    EXPECT_EQ(jaccard("a b", "c d"), 0.0);
    EXPECT_EQ(jaccard("", ""), 1.0);
    EXPECT_EQ(jaccard("Is Stop", "is stop"), 1.0);
}

TEST(Jaccard, Symmetric) {
    std::mt19937 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_sentence(rng, 6), b = random_sentence(rng, 6);
        EXPECT_EQ(jaccard(a, b), jaccard(b, a));
        if (!tokenize(a).empty()) EXPECT_EQ(jaccard(a, a), 1.0);
    }
    std::vector<std::string> none;
    EXPECT_EQ(max_jaccard("a", none), 0.0);
}

TEST(Repetition, HandFixture) {
    RuleChain c(xy("is near"), {xy("is the upper house of"), xy("is the upper house of"), xy("is the legislature of")}, 3);
    std::vector<RuleChain> chains{c};
    EXPECT_NEAR(repetition_rate(chains, 0.9), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(jaccard("X is the upper house of Y", "X is the legislature of Y"), 0.625, 1e-12);
}

TEST(Repetition, DisjointAndErrors) {
    std::vector<RuleChain> chains{RuleChain(Atom("X", "alpha", "Y"), {Atom("P", "beta", "Q")}, 1)};
    EXPECT_EQ(repetition_rate(chains, 0.5), 0.0);
    EXPECT_THROW(repetition_rate(chains, 0.0), Error);
    EXPECT_THROW(repetition_rate(chains, 1.1), Error);
    std::vector<RuleChain> empty{RuleChain(xy("p"), 2)};
    EXPECT_THROW(repetition_rate(empty, 0.9), Error);
}

TEST(Repetition, PremiseCounts) {
    std::vector<RuleChain> chains{RuleChain(xy("is stop of"), {xy("is stop of")}, 1)};
    EXPECT_EQ(repetition_rate(chains, 1.0), 1.0);
}

TEST(Repetition, MonotoneInThreshold) {
    std::mt19937 rng(55);
    const std::vector<std::string> words{"is", "the", "of", "part", "stop", "near", "capital", "house"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<RuleChain> chains;
        for (int c = 0; c < 3; ++c) {
            auto rel = [&] {
                std::string r;
                std::size_t n = 1 + rng() % 4;
                for (std::size_t i = 0; i < n; ++i) r += words[rng() % words.size()] + " ";
                return r;
            };
            std::vector<Atom> hyps;
            int k = 1 + static_cast<int>(rng() % 4);
            for (int i = 0; i < k; ++i) hyps.push_back(xy(rel()));
            chains.emplace_back(xy(rel()), hyps, k);
        }
        double prev = 1.0;
        for (double t : {0.5, 0.8, 0.9, 0.95, 1.0}) {
            double r = repetition_rate(chains, t);
            EXPECT_LE(r, prev);
            EXPECT_GE(r, 0.0);
            prev = r;
        }
    }
}

TEST(Lengths, Taxonomy) {
    std::vector<RuleChain> chains{RuleChain(xy("p"), 3), RuleChain(xy("p"), {xy("a"), xy("b")}, 3),
                                  RuleChain(xy("p"), {xy("a"), xy("b"), xy("c")}, 3),
                                  RuleChain(xy("p"), {xy("d"), xy("e"), xy("f")}, 3)};
    auto st = chain_length_stats(chains);
    EXPECT_EQ(st.histogram, (std::map<std::size_t, std::size_t>{{2, 1}, {3, 2}}));
    EXPECT_EQ(st.zero_count, 1u);
    EXPECT_EQ(st.partial_count, 1u);
    std::vector<RuleChain> none;
    auto empty = chain_length_stats(none);
    EXPECT_TRUE(empty.histogram.empty());
    EXPECT_EQ(empty.zero_count + empty.partial_count, 0u);
}

TEST(Evaluate, IdentityScoresOne) {
    std::vector<RuleChain> gold{RuleChain(Atom("A", "is stop of", "B"),
                                          {Atom("A", "is served by", "B"), Atom("A", "is part of", "B")}, 2),
                                RuleChain(Atom("A", "plays for", "B"), {Atom("A", "is a member of", "B")}, 1)};
    std::vector<double> th{0.8, 0.9, 0.95};
    auto rep = evaluate(gold, gold, th);
    EXPECT_DOUBLE_EQ(rep.bleu1, 1.0);
    EXPECT_DOUBLE_EQ(rep.bleu2, 1.0);
    EXPECT_DOUBLE_EQ(rep.bleu4, 1.0);
    EXPECT_DOUBLE_EQ(rep.rouge_l, 1.0);
    EXPECT_EQ(rep.generated_atoms, 3u);
    EXPECT_EQ(rep.self_bleu_chains, 1u);
    EXPECT_EQ(rep.repetition_rate_by_threshold.size(), 3u);
    auto table = render_report_table(rep);
    EXPECT_NE(table.find("100.0"), std::string::npos);
    Json j = report_to_json(rep);
    EXPECT_EQ(j["bleu1"], 1.0);
}

TEST(Evaluate, MissingHopsCountAgainst) {
    std::vector<RuleChain> gold{RuleChain(Atom("A", "is stop of", "B"),
                                          {Atom("A", "is served by", "B"), Atom("A", "is part of", "B")}, 2)};
    std::vector<RuleChain> gen{RuleChain(Atom("A", "is stop of", "B"), {Atom("A", "is served by", "B")}, 2)};
    std::vector<double> th{0.9};
    auto rep = evaluate(gen, gold, th);
    EXPECT_LT(rep.rouge_l, 1.0);
    EXPECT_NEAR(rep.rouge_l, 0.5, 1e-12);
    EXPECT_EQ(rep.lengths.partial_count, 1u);
}
