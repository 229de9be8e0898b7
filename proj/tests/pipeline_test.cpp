#include <gtest/gtest.h>

#include "rulechain/metrics.hpp"
#include "rulechain/pipeline.hpp"
#include "scripted.hpp"

using namespace rulechain;
using scripted::Hop;

namespace {

const EntityTyping kTyping{"Transit Stop", "Transit Line"};
const Atom kPremise{"A", "is stop of", "B"};

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

std::shared_ptr<const Scorer> scores() {
    return scripted::table_scorer({{"is served by", 0.3},
                                   {"is a major part of", 0.8},
                                   {"connects to", 0.5},
                                   {"is near", 0.4},
                                   {"runs through", 0.6},
                                   {"is an endpoint of", 0.7}});
}

std::vector<Hop> three_good_hops() {
    return {{"Orion is served by the line and is a major part of it.",
             "1. <A> is served by <B>\n2. <A> is a major part of <B>", "is a major part of"},
            {"The stop connects to the line, which runs through it.",
             "1. <A> connects to <B>\n2. <A> runs through <B>", "runs through"},
            {"It is near the line and is an endpoint of it.",
             "- <A> is near <B>\n- <A> is an endpoint of <B>", "is an endpoint of"}};
}

} // namespace

TEST(SingleHop, PicksHighestScore) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise, {three_good_hops()[0]});
    auto cfg = scripted::config_for(fx, scores(), 1);
    std::vector<Atom> premises{kPremise};
    HopResult r = run_single_hop(kTyping, premises, cfg);
    ASSERT_EQ(r.scores.size(), 2u);
    EXPECT_DOUBLE_EQ(r.scores[0], 0.3);
    EXPECT_DOUBLE_EQ(r.scores[1], 0.8);
    ASSERT_TRUE(r.chosen);
    EXPECT_EQ(r.chosen->relation(), "is a major part of");
    EXPECT_DOUBLE_EQ(r.reward, 0.8);
    EXPECT_FALSE(r.kl.has_value());
}

TEST(SingleHop, UnparseableExtraction) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise, {{"Some text.", "I could not find any relationships.", ""}});
    auto cfg = scripted::config_for(fx, scores(), 1);
    std::vector<Atom> premises{kPremise};
    HopResult r = run_single_hop(kTyping, premises, cfg);
    EXPECT_FALSE(r.chosen);
    EXPECT_EQ(r.reward, 0.0);
    EXPECT_TRUE(r.statements.empty());
}

TEST(SingleHop, PremiseDuplicateExcluded) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise,
                        {{"It is stop of the line.", "<A> is stop of <B>\n<A> is served by <B>", "is served by"}});
    auto cfg = scripted::config_for(fx, scores(), 1);
    cfg.repetition_threshold = 0.9;
    std::vector<Atom> premises{kPremise};
    HopResult r = run_single_hop(kTyping, premises, cfg);
    ASSERT_EQ(r.repetition_dropped.size(), 1u);
    EXPECT_EQ(r.repetition_dropped[0], kPremise);
    ASSERT_EQ(r.candidates.candidates.size(), 1u);
    EXPECT_EQ(r.chosen->relation(), "is served by");
    EXPECT_EQ(r.statements.size(), r.scores.size());
}

TEST(SingleHop, ReferenceScorerAddsPenalty) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise, {three_good_hops()[0]});
    auto cfg = scripted::config_for(fx, scores(), 1);
    cfg.reference_scorer = scores();
    std::vector<Atom> premises{kPremise};
    HopResult same = run_single_hop(kTyping, premises, cfg);
    ASSERT_TRUE(same.kl);
    EXPECT_EQ(*same.kl, 0.0);
    EXPECT_EQ(*same.penalized_reward, same.reward);

    cfg.reference_scorer = scripted::table_scorer({{"is served by", 0.8}, {"is a major part of", 0.3}});
    HopResult diff = run_single_hop(kTyping, premises, cfg);
    EXPECT_GT(*diff.kl, 0.0);
    EXPECT_DOUBLE_EQ(*diff.penalized_reward, diff.reward - cfg.lambda * *diff.kl);
}

TEST(SingleHop, FaithfulnessFilterOptIn) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise,
                        {{"The stop is served by the line.", "<A> is served by <B>\n<A> orbits <B>", "is served by"}});
    auto cfg = scripted::config_for(fx, scores(), 1);
    std::vector<Atom> premises{kPremise};
    EXPECT_EQ(run_single_hop(kTyping, premises, cfg).candidates.candidates.size(), 2u);
    cfg.min_overlap = 1.0;
    auto r = run_single_hop(kTyping, premises, cfg);
    EXPECT_EQ(r.candidates.candidates.size(), 1u);
    EXPECT_EQ(r.candidates.diagnostics.unfaithful_dropped, 1u);
}

TEST(MultiHop, CompleteChainAndPromptGrowth) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise, three_good_hops());
    auto cfg = scripted::config_for(fx, scores(), 3);
    auto run = run_multi_hop(kTyping, kPremise, cfg);
    EXPECT_EQ(run.chain.status(), ChainStatus::complete);
    ASSERT_EQ(run.chain.size(), 3u);
    EXPECT_EQ(run.chain.hypotheses()[0].relation(), "is a major part of");
    EXPECT_EQ(run.chain.hypotheses()[2].relation(), "is an endpoint of");
    ASSERT_EQ(run.hops.size(), 3u);
    for (std::size_t k = 0; k < run.hops.size(); ++k) {
        EXPECT_EQ(run.hops[k].premises.size(), k + 1);
        EXPECT_EQ(count_occurrences(run.hops[k].generation_prompt, "<A> "), k + 1);
    }
    const auto& p2 = run.hops[1].generation_prompt;
    EXPECT_NE(p2.find("<A> is stop of <B>, <A> is a major part of <B>"), std::string::npos);
}

TEST(MultiHop, FailureAtHopOne) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise, {{"Nothing useful.", "no atoms here", ""}});
    auto cfg = scripted::config_for(fx, scores(), 3);
    auto run = run_multi_hop(kTyping, kPremise, cfg);
    EXPECT_EQ(run.chain.status(), ChainStatus::failure);
    EXPECT_EQ(run.chain.size(), 0u);
    EXPECT_EQ(run.hops.size(), 1u);
}

TEST(MultiHop, PartialFailureAtHopThreeOfFour) {
    auto hops = three_good_hops();
    hops[2] = {"Rambling text.", "Sorry, nothing to extract.", ""};
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise, hops);
    auto cfg = scripted::config_for(fx, scores(), 4);
    auto run = run_multi_hop(kTyping, kPremise, cfg);
    EXPECT_EQ(run.chain.status(), ChainStatus::partial_failure);
    EXPECT_EQ(run.chain.size(), 2u);
    EXPECT_EQ(run.hops.size(), 3u);
}

TEST(MultiHop, EmptyGenerationEndsChain) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise, {{"", "", ""}});
    auto cfg = scripted::config_for(fx, scores(), 2);
    auto run = run_multi_hop(kTyping, kPremise, cfg);
    EXPECT_EQ(run.chain.status(), ChainStatus::failure);
}

TEST(MultiHop, NoChosenAtomRepeatsChain) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise,
                        {{"t1", "<A> is stop of <B>\n<A> is served by <B>", "is served by"},
                         {"t2", "<A> is served by <B>\n<A> is stop of <B>\n<A> is near <B>", "is near"}});
    auto cfg = scripted::config_for(fx, scores(), 2);
    auto run = run_multi_hop(kTyping, kPremise, cfg);
    ASSERT_EQ(run.chain.size(), 2u);
    auto atoms = run.chain.atoms();
    for (std::size_t i = 1; i < atoms.size(); ++i) {
        std::vector<std::string> earlier;
        for (std::size_t j = 0; j < i; ++j) earlier.push_back(atoms[j].plain_form());
        EXPECT_LT(max_jaccard(atoms[i].plain_form(), earlier), cfg.repetition_threshold);
    }
}

TEST(MultiHop, BackendErrorCarriesHopAndPartials) {
    scripted::Fixtures fx;
    auto hops = three_good_hops();
    hops.resize(1);
    scripted::add_chain(fx, kTyping, kPremise, hops);
    auto cfg = scripted::config_for(fx, scores(), 3);
    try {
        run_multi_hop(kTyping, kPremise, cfg);
        FAIL();
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.hop(), 2);
        EXPECT_EQ(e.kind(), ErrorKind::fixture_missing);
        ASSERT_TRUE(e.partial_chain());
        EXPECT_EQ(e.partial_chain()->size(), 1u);
        EXPECT_EQ(e.partial_hops().size(), 1u);
        EXPECT_EQ(std::string(e.what()).rfind("hop 2: ", 0), 0u);
        EXPECT_EQ(std::string(e.what()).find("hop 2: ", 1), std::string::npos);
    }
}

TEST(MultiHop, DeterministicWithFallback) {
    auto cfg_for = [] {
        scripted::Fixtures fx;
        scripted::add_chain(fx, kTyping, kPremise, three_good_hops());
        return scripted::config_for(fx, scores(), 5, true);
    };
    auto a = run_multi_hop(kTyping, kPremise, cfg_for());
    auto b = run_multi_hop(kTyping, kPremise, cfg_for());
    EXPECT_EQ(a.chain, b.chain);
    ASSERT_EQ(a.hops.size(), b.hops.size());
    for (std::size_t i = 0; i < a.hops.size(); ++i) {
        EXPECT_EQ(hop_record(0, a.hops[i]).dump(), hop_record(0, b.hops[i]).dump());
    }
}

TEST(Config, Validation) {
    scripted::Fixtures fx;
    auto cfg = scripted::config_for(fx, scores(), 3);
    EXPECT_NO_THROW(cfg.validate());
    auto bad = cfg;
    bad.target_hops = 6;
    EXPECT_THROW(bad.validate(), Error);
    bad = cfg;
    bad.scorer.reset();
    EXPECT_THROW(bad.validate(), Error);
    bad = cfg;
    bad.repetition_threshold = 0;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(Batch, OrderedAndParallelSafe) {
    scripted::Fixtures fx;
    std::vector<ChainJob> jobs;
    const std::vector<std::string> prems{"is stop of", "is terminus of", "is depot of", "is hub of", "is on"};
    for (const auto& p : prems) {
        Atom premise("A", p, "B");
        scripted::add_chain(fx, kTyping, premise, three_good_hops());
        jobs.push_back({kTyping, premise, 2});
    }
    auto cfg = scripted::config_for(fx, scores(), 2);
    auto serial = run_batch(jobs, cfg, 1);
    auto parallel = run_batch(jobs, cfg, 4);
    ASSERT_EQ(serial.size(), jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        EXPECT_EQ(serial[i].chain.premise().relation(), prems[i]);
        EXPECT_EQ(serial[i].chain, parallel[i].chain);
    }
}

TEST(Batch, LowestFailingJobIsReported) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise, three_good_hops());
    std::vector<ChainJob> jobs{{kTyping, kPremise, 1}, {kTyping, Atom("A", "unknown one", "B"), 1},
                               {kTyping, Atom("A", "unknown two", "B"), 1}};
    auto cfg = scripted::config_for(fx, scores(), 1);
    try {
        run_batch(jobs, cfg, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("unknown one"), std::string::npos);
    }
}

TEST(Records, HopAndChainShape) {
    scripted::Fixtures fx;
    scripted::add_chain(fx, kTyping, kPremise, three_good_hops());
    auto run = run_multi_hop(kTyping, kPremise, scripted::config_for(fx, scores(), 3));
    Json h = hop_record(7, run.hops[0]);
    EXPECT_EQ(h["record"], "hop");
    EXPECT_EQ(h["sample"], 7);
    EXPECT_EQ(h["hop"], 1);
    Json c = chain_record(7, run.chain);
    EXPECT_EQ(c["record"], "chain");
    EXPECT_EQ(chain_from_json(c["chain"]), run.chain);
}
