#include <gtest/gtest.h>

#include "ripple/distance.hpp"
#include "ripple/error.hpp"
#include "ripple/simlab.hpp"

using namespace ripple;

namespace {

struct Planted {
    Corpus corpus = sim::make_planted_corpus({});
    EmbedderConfig emb;
    VectorIndex index = build_index(corpus, emb);
};

const Planted& planted() {
    static const Planted p;
    return p;
}

}  // namespace

TEST(SemanticDistance, SelfIsRankOneWithoutExclusion) {
    const auto& p = planted();
    DistanceConfig cfg{100, 1, false, QueryMode::by_stored_title};
    const auto& t = p.corpus.documents()[5].title;
    EXPECT_EQ(semantic_distance(p.index, p.emb, t, t, cfg), 1u);
}

TEST(SemanticDistance, OutsideTopNIsEmpty) {
    const auto& p = planted();
    DistanceConfig cfg = DistanceConfig::for_mode(QueryMode::by_stored_title, 10, 1);
    const auto& a = p.corpus.documents()[0];  // cluster 0
    const auto& far = p.corpus.documents()[99];  // cluster 3
    EXPECT_FALSE(semantic_distance(p.index, p.emb, a.title, far.title, cfg).has_value());
    EXPECT_THROW(semantic_distance(p.index, p.emb, a.title, "No Such Title", cfg), NotFoundError);
    EXPECT_THROW(semantic_distance(p.index, p.emb, "No Such Title", a.title, cfg), NotFoundError);
}

TEST(SemanticDistance, ClusterMatesCloserThanOutsiders) {
    const auto& p = planted();
    DistanceConfig cfg = DistanceConfig::for_mode(QueryMode::by_stored_title, 99, 1);
    const auto& docs = p.corpus.documents();
    for (std::size_t i = 0; i < docs.size(); i += 7) {
        std::size_t mate = (i / 25) * 25 + (i % 25 + 1) % 25;
        if (mate == i) continue;
        std::size_t out = (i + 25) % docs.size();
        auto d_in = semantic_distance(p.index, p.emb, docs[i].title, docs[mate].title, cfg);
        auto d_out = semantic_distance(p.index, p.emb, docs[i].title, docs[out].title, cfg);
        ASSERT_TRUE(d_in && d_out);
        EXPECT_LT(*d_in, *d_out);
    }
}

TEST(RankedRetrieval, ExcludeSelfReranks) {
    const auto& p = planted();
    const auto& t = p.corpus.documents()[3].title;
    auto hits = ranked_retrieval(p.index, p.emb, t, DistanceConfig::for_mode(QueryMode::by_stored_title, 30, 1));
    ASSERT_EQ(hits.size(), 30u);
    for (std::size_t i = 0; i < hits.size(); ++i) {
        EXPECT_NE(hits[i].title, t);
        EXPECT_EQ(hits[i].rank, i + 1);
    }
    auto free = DistanceConfig::for_mode(QueryMode::by_free_text);
    EXPECT_FALSE(free.exclude_self);
    EXPECT_TRUE(DistanceConfig::for_mode(QueryMode::by_stored_title).exclude_self);
}

TEST(NeighborList, StepOneOverSmallCorpus) {
    auto corpus = sim::make_random_corpus(10, 4);
    EmbedderConfig emb;
    auto ix = build_index(corpus, emb);
    DistanceConfig cfg{10, 1, false, QueryMode::by_stored_title};
    auto list = neighbor_list(ix, emb, corpus.documents()[0].title, cfg);
    ASSERT_EQ(list.neighbors.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(list.neighbors[i].rank, i + 1);
}

TEST(NeighborList, StepFiveSamplesTwoHundredRanks) {
    auto corpus = sim::make_random_corpus(1001, 8);
    EmbedderConfig emb;
    auto ix = build_index(corpus, emb);
    auto list = neighbor_list(ix, emb, corpus.documents()[17].title, DistanceConfig::for_mode(QueryMode::by_stored_title));
    ASSERT_EQ(list.neighbors.size(), 200u);
    EXPECT_EQ(list.neighbors.front().rank, 1u);
    EXPECT_EQ(list.neighbors[1].rank, 6u);
    EXPECT_EQ(list.neighbors[2].rank, 11u);
    EXPECT_EQ(list.neighbors.back().rank, 996u);
    for (std::size_t r : list.sampled_ranks) EXPECT_TRUE(r >= 1 && r <= 1000);
    for (std::size_t i = 1; i < list.neighbors.size(); ++i)
        EXPECT_LT(list.neighbors[i - 1].rank, list.neighbors[i].rank);
}

TEST(NeighborList, FreeTextQuery) {
    const auto& p = planted();
    auto list = neighbor_list(p.index, p.emb, "completely unrelated words",
                              DistanceConfig::for_mode(QueryMode::by_free_text, 20, 5));
    EXPECT_EQ(list.neighbors.size(), 4u);
}

TEST(DistanceConfig, Validation) {
    EXPECT_THROW((DistanceConfig{0, 1, true, QueryMode::by_stored_title}.validate()), ArgumentError);
    EXPECT_THROW((DistanceConfig{10, 0, true, QueryMode::by_stored_title}.validate()), ArgumentError);
}

TEST(TierLabel, Buckets) {
    EXPECT_EQ(tier_label(1), "core");
    EXPECT_EQ(tier_label(50), "near");
    EXPECT_EQ(tier_label(100), "adjacent");
    EXPECT_EQ(tier_label(999), "unrelated");
}
