#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ripple/corpus.hpp"
#include "ripple/evalharness.hpp"
#include "ripple/genpipe.hpp"

namespace ripple::sim {

struct PlantedCorpusSpec {
    std::size_t n_clusters = 4;
    std::size_t docs_per_cluster = 25;
    double intra_cluster_vocab_overlap = 0.5;  // share of tokens drawn from the cluster core vocabulary
    std::uint64_t seed = 0;
    std::size_t embed_dim = 64;  // local embedder dim the clusters are planted for
    std::size_t tokens_per_doc = 60;

    void validate() const;
};

/// Every word of a cluster hashes into buckets owned by that cluster alone
/// (bucket % n_clusters == cluster), so under the local embedder at
/// `embed_dim` cross-cluster cosine is exactly 0 while every pair of
/// cluster-mates shares the cluster anchor word.
Corpus make_planted_corpus(const PlantedCorpusSpec& spec);

/// Cluster number of a planted document (from its doc_id "c<cluster>-d<doc>").
std::size_t planted_cluster(const Document& doc);

/// Unstructured corpus over a small shared vocabulary. Roughly one document
/// in ten is a permutation of another document's tokens, so exact cosine
/// ties occur.
Corpus make_random_corpus(std::size_t n_docs, std::uint64_t seed, std::size_t vocab_size = 300);

struct DegradationProfile {
    enum class Kind { step, exponential_recovery, constant };

    Kind kind = Kind::constant;
    double p0 = 0.75;      // base accuracy
    double p1 = 0.25;      // floor accuracy
    double scale = 50.0;   // lambda for exponential recovery, cutoff rank r* for step

    static DegradationProfile step(double p0, double p1, double cutoff);
    static DegradationProfile exponential(double p0, double p1, double lambda);
    static DegradationProfile constant(double p0);

    /// "step:p0,p1,r", "exp:p0,p1,lambda" or "constant:p0".
    static DegradationProfile parse(const std::string& text);
    std::string to_string() const;

    void validate() const;
    /// a(x) for a 1-based distance.
    double accuracy_at(std::size_t x) const;
    /// Expected knowledge-delta against the constant base at p0.
    double planted_delta(std::size_t x) const { return p0 - accuracy_at(x); }
};

/// Answers an item correctly with probability a(semantic_distance). The draw
/// for an item depends only on (seed, item_id), so providers sharing a seed
/// are coupled item by item and parallel evaluation changes nothing.
class SimulatedProvider final : public AnswerProvider {
public:
    SimulatedProvider(std::string id, DegradationProfile profile, std::uint64_t seed);

    const std::string& id() const override { return id_; }
    ProviderKind kind() const override { return ProviderKind::simulated; }
    std::string answer(const MCQItem& item, const std::string& prompt) const override;
    const DegradationProfile& profile() const noexcept { return profile_; }

private:
    std::string id_;
    DegradationProfile profile_;
    std::uint64_t seed_;
};

/// Picks one of the four letters uniformly per (seed, item_id).
class UniformRandomProvider final : public AnswerProvider {
public:
    UniformRandomProvider(std::string id, std::uint64_t seed);

    const std::string& id() const override { return id_; }
    ProviderKind kind() const override { return ProviderKind::simulated; }
    std::string answer(const MCQItem& item, const std::string& prompt) const override;

private:
    std::string id_;
    std::uint64_t seed_;
};

struct SyntheticDatasetSpec {
    std::size_t n_retrieve = 1000;
    std::size_t rank_step = 5;
    std::size_t n_targets = 1;
    std::size_t topics_per_rank = 100;
    std::size_t questions_per_topic = 5;
    std::uint64_t seed = 0;
    std::string dataset_id = "synthetic";
};

/// Placeholder items at every sampled rank; only ids, topics and distances
/// matter to simulated providers.
RippleDataset make_synthetic_dataset(const SyntheticDatasetSpec& spec);

struct RecoveryPoint {
    std::size_t distance = 0;
    double planted = 0.0;
    double estimated = 0.0;
    double abs_error = 0.0;
    std::size_t n_questions = 0;
};

struct RecoveryReport {
    std::string profile;
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    std::size_t questions_per_bucket = 0;
    bool passed = false;
    std::size_t worst_distance = 0;
    double worst_error = 0.0;
    std::vector<RecoveryPoint> points;

    nlohmann::ordered_json to_json() const;
};

/// Evaluates constant-p0 base and `profile` edited providers (same seed) on
/// the dataset and compares the estimated ripple curve with the planted
/// delta bucket by bucket. Throws PreconditionError when a bucket holds fewer
/// than `questions_per_bucket` items.
RecoveryReport recovery_test(const DegradationProfile& profile, const RippleDataset& dataset,
                             std::size_t questions_per_bucket, double tolerance, std::uint64_t seed,
                             Bucketing bucketing = Bucketing::per_rank(), std::size_t concurrency = 1);

}  // namespace ripple::sim
