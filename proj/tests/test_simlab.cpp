#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ripple/error.hpp"
#include "ripple/simlab.hpp"
#include "ripple/vindex.hpp"

using namespace ripple;
using namespace ripple::sim;

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

MCQItem at_distance(std::size_t i, std::size_t d) {
    MCQItem it;
    it.item_id = "item" + std::to_string(i);
    it.topic = "t" + std::to_string(i);
    it.semantic_distance = d;
    it.answer_index = static_cast<int>(i % 4);
    return it;
}

}  // namespace

TEST(PlantedCorpus, ShapeAndClusterGeometry) {
    PlantedCorpusSpec spec;
    auto corpus = make_planted_corpus(spec);
    ASSERT_EQ(corpus.size(), 100u);
    std::array<int, 4> per_cluster{};
    for (const auto& d : corpus.documents()) ++per_cluster.at(planted_cluster(d));
    for (int n : per_cluster) EXPECT_EQ(n, 25);

    auto ix = build_index(corpus, EmbedderConfig{});
    for (std::size_t a = 0; a < ix.size(); a += 3)
        for (std::size_t b = a + 1; b < ix.size(); b += 5) {
            const bool same = planted_cluster(*corpus.find_id(ix.doc_id(a))) ==
                              planted_cluster(*corpus.find_id(ix.doc_id(b)));
            const double c = dot(ix.row(a), ix.row(b));
            if (same) EXPECT_GT(c, 0.05);
            else EXPECT_EQ(c, 0.0);
        }
}

TEST(PlantedCorpus, SeededAndValidated) {
    PlantedCorpusSpec spec;
    spec.seed = 42;
    EXPECT_EQ(serialize_jsonl(make_planted_corpus(spec)), serialize_jsonl(make_planted_corpus(spec)));
    auto other = spec;
    other.seed = 43;
    EXPECT_NE(serialize_jsonl(make_planted_corpus(spec)), serialize_jsonl(make_planted_corpus(other)));
    spec.intra_cluster_vocab_overlap = 0.0;
    EXPECT_THROW(make_planted_corpus(spec), ArgumentError);
    spec.intra_cluster_vocab_overlap = 1.5;
    EXPECT_THROW(make_planted_corpus(spec), ArgumentError);
}

TEST(RandomCorpus, HasExactDuplicateVectors) {
    auto corpus = make_random_corpus(200, 1);
    EXPECT_EQ(corpus.size(), 200u);
    auto ix = build_index(corpus, EmbedderConfig{});
    std::size_t ties = 0;
    for (std::size_t a = 0; a < ix.size(); ++a)
        for (std::size_t b = a + 1; b < ix.size(); ++b)
            if (std::equal(ix.row(a).begin(), ix.row(a).end(), ix.row(b).begin())) ++ties;
    EXPECT_GT(ties, 0u);
}

TEST(DegradationProfile, StepValues) {
    auto p = DegradationProfile::step(0.75, 0.25, 50);
    EXPECT_EQ(p.accuracy_at(1), 0.25);
    EXPECT_EQ(p.accuracy_at(50), 0.25);
    EXPECT_EQ(p.accuracy_at(51), 0.75);
    EXPECT_EQ(p.planted_delta(1), 0.5);
    EXPECT_EQ(p.planted_delta(500), 0.0);
}

TEST(DegradationProfile, ExponentialClosedForm) {
    auto p = DegradationProfile::exponential(0.75, 0.25, 100);
    EXPECT_NEAR(p.planted_delta(100), 0.5 * std::exp(-1.0), 1e-12);
    EXPECT_NEAR(p.planted_delta(100), 0.18394, 5e-6);
    EXPECT_NEAR(p.planted_delta(1), 0.5 * std::exp(-0.01), 1e-12);
    EXPECT_LT(p.planted_delta(1000), 1e-4);
}

TEST(DegradationProfile, ParseAndPrint) {
    auto p = DegradationProfile::parse("exp:0.75,0.25,100");
    EXPECT_EQ(p.kind, DegradationProfile::Kind::exponential_recovery);
    EXPECT_EQ(p.to_string(), "exp:0.75,0.25,100");
    EXPECT_EQ(DegradationProfile::parse("step:0.8,0.3,50").to_string(), "step:0.8,0.3,50");
    EXPECT_EQ(DegradationProfile::parse("constant:0.6").accuracy_at(7), 0.6);
    EXPECT_THROW(DegradationProfile::parse("step:0.8,0.3"), ArgumentError);
    EXPECT_THROW(DegradationProfile::parse("linear:1,2,3"), ArgumentError);
    EXPECT_THROW(DegradationProfile::parse("step:0.8,x,50"), ArgumentError);
    EXPECT_THROW(DegradationProfile::parse("step:1.2,0.3,50"), ArgumentError);
    EXPECT_THROW(DegradationProfile::parse("exp:0.8,0.3,0"), ArgumentError);
    EXPECT_THROW(DegradationProfile::parse("nonsense"), ArgumentError);
}

TEST(SimulatedProvider, ConstantOneAlwaysCorrect) {
    SimulatedProvider p("p", DegradationProfile::constant(1.0), 3);
    for (std::size_t i = 0; i < 500; ++i) {
        auto it = at_distance(i, 1 + i);
        EXPECT_EQ(p.answer(it, ""), std::string(1, static_cast<char>('A' + it.answer_index)));
    }
    SimulatedProvider never("n", DegradationProfile::constant(0.0), 3);
    for (std::size_t i = 0; i < 500; ++i) {
        auto it = at_distance(i, 1);
        EXPECT_NE(never.answer(it, ""), std::string(1, static_cast<char>('A' + it.answer_index)));
    }
}

TEST(SimulatedProvider, EmpiricalAccuracyMatchesProfile) {
    auto profile = DegradationProfile::exponential(0.75, 0.25, 100);
    SimulatedProvider p("p", profile, 11);
    std::size_t correct = 0;
    const std::size_t n = 10000;
    for (std::size_t i = 0; i < n; ++i) {
        auto it = at_distance(i, 100);
        correct += p.answer(it, "") == std::string(1, static_cast<char>('A' + it.answer_index));
    }
    EXPECT_NEAR(static_cast<double>(correct) / n, 0.75 - 0.5 * std::exp(-1.0), 0.02);
}

TEST(SimulatedProvider, SameSeedIsPaired) {
    // Under a shared seed the lower-accuracy provider is right only where the
    // higher one is.
    SimulatedProvider hi("hi", DegradationProfile::constant(0.8), 5);
    SimulatedProvider lo("lo", DegradationProfile::constant(0.4), 5);
    for (std::size_t i = 0; i < 2000; ++i) {
        auto it = at_distance(i, 1);
        const std::string truth(1, static_cast<char>('A' + it.answer_index));
        if (lo.answer(it, "") == truth) EXPECT_EQ(hi.answer(it, ""), truth);
    }
}

TEST(SyntheticDataset, Layout) {
    auto ds = make_synthetic_dataset({100, 5, 2, 3, 2, 0, "x"});
    EXPECT_EQ(ds.items.size(), 2u * 20u * 3u * 2u);
    EXPECT_EQ(ds.stats.topics, 2u * 20u * 3u);
    std::set<std::size_t> ranks;
    for (const auto& it : ds.items) ranks.insert(it.semantic_distance);
    EXPECT_EQ(ranks.size(), 20u);
    EXPECT_EQ(*ranks.begin(), 1u);
    EXPECT_EQ(*ranks.rbegin(), 96u);
    EXPECT_THROW(make_synthetic_dataset({0, 5, 1, 1, 1, 0, "x"}), ArgumentError);
}

class Recovery : public testing::Test {
protected:
    static const RippleDataset& dataset() {
        static const RippleDataset ds = make_synthetic_dataset({1000, 50, 1, 100, 5, 0, "recovery"});
        return ds;
    }
};

TEST_F(Recovery, StepProfileRecoveredWithinLooseTolerance) {
    auto rep = recovery_test(DegradationProfile::step(0.75, 0.25, 50), dataset(), 500, 0.1, 1);
    EXPECT_TRUE(rep.passed);
    ASSERT_EQ(rep.points.size(), 20u);
    EXPECT_EQ(rep.points[0].planted, 0.5);
    EXPECT_EQ(rep.points[1].planted, 0.0);
    EXPECT_EQ(rep.points[0].n_questions, 500u);
}

TEST_F(Recovery, TinyToleranceFails) {
    auto rep = recovery_test(DegradationProfile::exponential(0.75, 0.25, 100), dataset(), 500, 1e-4, 1);
    EXPECT_FALSE(rep.passed);
    EXPECT_GT(rep.worst_error, 1e-4);
    EXPECT_EQ(rep.to_json()["passed"], false);
}

TEST_F(Recovery, IdentityIsExactlyFlat) {
    auto rep = recovery_test(DegradationProfile::constant(0.75), dataset(), 500, 0.0, 9);
    EXPECT_TRUE(rep.passed);
    for (const auto& p : rep.points) EXPECT_EQ(p.estimated, 0.0);
}

TEST_F(Recovery, UnderfilledBucketIsPrecondition) {
    EXPECT_THROW(recovery_test(DegradationProfile::constant(0.75), dataset(), 501, 0.05, 1), PreconditionError);
}

TEST_F(Recovery, WidthBucketsPoolRanks) {
    auto ds = make_synthetic_dataset({1000, 5, 1, 20, 5, 0, "w"});
    auto rep = recovery_test(DegradationProfile::step(0.75, 0.25, 50), ds, 1000, 0.1, 2, Bucketing::fixed(50), 2);
    ASSERT_EQ(rep.points.size(), 20u);
    EXPECT_EQ(rep.points[0].distance, 1u);
    EXPECT_EQ(rep.points[1].distance, 51u);
    EXPECT_EQ(rep.points[0].n_questions, 1000u);
    EXPECT_TRUE(rep.passed);
}
