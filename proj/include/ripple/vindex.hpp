#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ripple/corpus.hpp"
#include "ripple/embedder.hpp"

namespace ripple {

struct RankedNeighbor {
    std::string doc_id;
    std::string title;
    std::size_t rank = 0;     // 1-based, no gaps within one result
    double similarity = 0.0;  // cosine, clamped to [-1, 1]

    friend bool operator==(const RankedNeighbor&, const RankedNeighbor&) = default;
};

/// Exact flat index. Entries are kept in doc_id order, which also makes
/// "ascending doc_id" tie-breaking equal to ascending row position.
class VectorIndex {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    VectorIndex() = default;

    struct Entry {
        std::string doc_id;
        std::string title;
        EmbeddingVector vector;
    };

    /// Sorts by doc_id; rejects duplicate ids/titles and dimension mismatches.
    static VectorIndex from_entries(std::size_t dim, std::vector<Entry> entries,
                                    std::uint64_t fingerprint);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    const std::string& doc_id(std::size_t row) const { return ids_[row]; }
    const std::string& title(std::size_t row) const { return titles_[row]; }
    std::span<const float> row(std::size_t row) const {
        return {matrix_.data() + row * dim_, dim_};
    }
    /// Row of a stored title, or -1.
    std::ptrdiff_t find_title(std::string_view title) const;
    EmbeddingVector stored_vector(std::string_view title) const;

    std::vector<std::uint8_t> serialize() const;
    static VectorIndex deserialize(std::span<const std::uint8_t> bytes);

private:
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<std::string> titles_;
    std::vector<float> matrix_;  // size() x dim_, row-major
    std::unordered_map<std::string, std::size_t> by_title_;
    std::uint64_t fingerprint_ = 0;
};

/// Text embedded for a document: title line followed by the body.
std::string index_text(const Document& doc);

VectorIndex build_index(const Corpus& corpus, const EmbedderConfig& embedder);

/// Top-n by descending cosine, ties by ascending doc_id. OpenMP kernel:
/// parallel scoring and per-thread top-n selection, then a merge.
std::vector<RankedNeighbor> query(const VectorIndex& index, const EmbeddingVector& q, std::size_t n);

/// Serial reference for `query`: score every row, sort everything, cut.
std::vector<RankedNeighbor> query_serial(const VectorIndex& index, const EmbeddingVector& q,
                                         std::size_t n);

/// query(index, stored_vector(title), n). The self-hit is kept and ranked
/// first among exact ties.
std::vector<RankedNeighbor> query_by_title(const VectorIndex& index, std::string_view title,
                                           std::size_t n);

void save_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index(const std::filesystem::path& path);

}  // namespace ripple
