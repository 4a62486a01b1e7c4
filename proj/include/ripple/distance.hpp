#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ripple/embedder.hpp"
#include "ripple/vindex.hpp"

namespace ripple {

enum class QueryMode { by_stored_title, by_free_text };

struct DistanceConfig {
    std::size_t n_retrieve = 1000;
    std::size_t rank_step = 5;
    bool exclude_self = true;
    QueryMode query_mode = QueryMode::by_stored_title;

    /// Default self-exclusion per mode: on for stored titles, off for free text.
    static DistanceConfig for_mode(QueryMode mode, std::size_t n_retrieve = 1000,
                                   std::size_t rank_step = 5);
    void validate() const;
};

/// d(c, .) for one concept c, materialized at the sampled ranks only.
struct NeighborList {
    std::string target_concept;
    std::vector<RankedNeighbor> neighbors;  // ascending rank
    std::size_t n_requested = 0;
    std::vector<std::size_t> sampled_ranks;
};

/// Full top-n_retrieve ranking for a concept with optional self-exclusion and
/// re-ranking to 1..N. `embedder` is used only in free-text mode.
std::vector<RankedNeighbor> ranked_retrieval(const VectorIndex& index, const EmbedderConfig& embedder,
                                             std::string_view concept_query, const DistanceConfig& config);

/// Rank of `c_prime` in the retrieval for `c`, or nullopt when it is outside
/// the top n_retrieve. Throws NotFoundError for an unknown c_prime or an
/// unresolvable stored-title c.
std::optional<std::size_t> semantic_distance(const VectorIndex& index, const EmbedderConfig& embedder,
                                             std::string_view c, std::string_view c_prime,
                                             const DistanceConfig& config);

NeighborList neighbor_list(const VectorIndex& index, const EmbedderConfig& embedder,
                           std::string_view target, const DistanceConfig& config);

/// Display annotation only: coarse proximity tier for a rank.
std::string_view tier_label(std::size_t rank) noexcept;

nlohmann::ordered_json to_json(const NeighborList& list, const DistanceConfig& config);

std::string_view to_string(QueryMode mode) noexcept;

}  // namespace ripple
