#include "ripple/distance.hpp"

#include <algorithm>

#include "ripple/error.hpp"

namespace ripple {

DistanceConfig DistanceConfig::for_mode(QueryMode mode, std::size_t n_retrieve, std::size_t rank_step) {
    DistanceConfig c;
    c.n_retrieve = n_retrieve;
    c.rank_step = rank_step;
    c.query_mode = mode;
    c.exclude_self = mode == QueryMode::by_stored_title;
    return c;
}

void DistanceConfig::validate() const {
    if (n_retrieve == 0) throw ArgumentError("n_retrieve must be positive");
    if (rank_step == 0) throw ArgumentError("rank_step must be positive");
    if (rank_step > n_retrieve) throw ArgumentError("rank_step must not exceed n_retrieve");
}

std::vector<RankedNeighbor> ranked_retrieval(const VectorIndex& index, const EmbedderConfig& embedder,
                                             std::string_view concept_query, const DistanceConfig& config) {
    config.validate();
    if (concept_query.empty()) throw NotFoundError("<empty concept>");

    // One extra hit covers the self-hit that is about to be dropped.
    const std::size_t fetch = config.n_retrieve + (config.exclude_self ? 1 : 0);
    std::vector<RankedNeighbor> hits =
        config.query_mode == QueryMode::by_stored_title
            ? query_by_title(index, concept_query, fetch)  // self leads its tie group
            : query(index, embed_one(embedder, std::string(concept_query)), fetch);
    if (config.exclude_self) {
        std::erase_if(hits, [&](const RankedNeighbor& h) { return h.title == concept_query; });
    }
    if (hits.size() > config.n_retrieve) hits.resize(config.n_retrieve);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
    return hits;
}

std::optional<std::size_t> semantic_distance(const VectorIndex& index, const EmbedderConfig& embedder,
                                             std::string_view c, std::string_view c_prime,
                                             const DistanceConfig& config) {
    if (index.find_title(c_prime) < 0) throw NotFoundError(std::string(c_prime));
    for (const auto& h : ranked_retrieval(index, embedder, c, config))
        if (h.title == c_prime) return h.rank;
    return std::nullopt;
}

NeighborList neighbor_list(const VectorIndex& index, const EmbedderConfig& embedder,
                           std::string_view target, const DistanceConfig& config) {
    NeighborList out;
    out.target_concept = std::string(target);
    out.n_requested = config.n_retrieve;
    for (auto& h : ranked_retrieval(index, embedder, target, config)) {
        if ((h.rank - 1) % config.rank_step != 0) continue;
        out.sampled_ranks.push_back(h.rank);
        out.neighbors.push_back(std::move(h));
    }
    return out;
}

std::string_view tier_label(std::size_t rank) noexcept {
    if (rank <= 10) return "core";
    if (rank <= 50) return "near";
    if (rank <= 100) return "adjacent";
    if (rank <= 250) return "same-subdomain";
    if (rank <= 500) return "general-context";
    return "unrelated";
}

std::string_view to_string(QueryMode mode) noexcept {
    return mode == QueryMode::by_stored_title ? "by-stored-title" : "by-free-text";
}

nlohmann::ordered_json to_json(const NeighborList& list, const DistanceConfig& config) {
    nlohmann::ordered_json j;
    j["target"] = list.target_concept;
    j["n_requested"] = list.n_requested;
    j["rank_step"] = config.rank_step;
    j["exclude_self"] = config.exclude_self;
    j["query_mode"] = to_string(config.query_mode);
    j["sampled_ranks"] = list.sampled_ranks;
    j["neighbors"] = nlohmann::ordered_json::array();
    for (const auto& n : list.neighbors) {
        nlohmann::ordered_json e;
        e["rank"] = n.rank;
        e["doc_id"] = n.doc_id;
        e["title"] = n.title;
        e["similarity"] = n.similarity;
        e["tier"] = tier_label(n.rank);
        j["neighbors"].push_back(std::move(e));
    }
    return j;
}

}  // namespace ripple
