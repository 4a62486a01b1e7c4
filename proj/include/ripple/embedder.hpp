#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ripple/http.hpp"

namespace ripple {

/// Unit-norm embedding. Every constructor path normalizes or verifies the norm,
/// so holders can rely on |norm - 1| <= 1e-6.
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    /// Normalizes `raw`; throws ContractError for an empty or all-zero input.
    static EmbeddingVector normalize(std::span<const double> raw);
    static EmbeddingVector normalize(std::span<const float> raw);
    /// Takes stored unit floats as-is after checking the norm.
    static EmbeddingVector from_unit(std::vector<float> values);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const float> values() const noexcept { return values_; }
    double norm() const noexcept;

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    explicit EmbeddingVector(std::vector<float> v) : values_(std::move(v)) {}
    std::vector<float> values_;
};

/// Cosine of unit vectors: sequential double-precision dot product.
double cosine(std::span<const float> a, std::span<const float> b) noexcept;
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) noexcept {
    return cosine(a.values(), b.values());
}

enum class EmbedderKind { remote, local_deterministic };

inline constexpr const char* kEmbedApiKeyEnv = "RIPPLE_EMBED_API_KEY";

struct EmbedderConfig {
    EmbedderKind kind = EmbedderKind::local_deterministic;
    std::string endpoint_url;
    std::string model_name = "local-hash-v1";
    std::size_t dim = 64;
    std::size_t batch_size = 32;
    std::size_t max_input_chars = 4000;
    std::size_t batch_parallelism = 1;
    RetryPolicy retry;

    /// Throws ArgumentError when the invariants do not hold.
    void validate() const;
    /// Stable text form of the fields that affect vectors (used in fingerprints).
    std::string fingerprint_text() const;
};

/// Lowercased ASCII-alphanumeric tokens (bytes >= 0x80 are kept inside tokens).
std::vector<std::string> tokenize(std::string_view text);

/// Offline embedder: FNV-1a token hashes folded into `dim` count buckets, then
/// normalized. Text without tokens maps to the first basis vector.
EmbeddingVector local_hash_embed(std::string_view text, std::size_t dim);

/// Bucket a single (already lowercased) token lands in under local_hash_embed.
std::size_t local_embed_bucket(std::string_view token, std::size_t dim) noexcept;

/// One vector per input text, in input order. Inputs longer than
/// max_input_chars are cut before dispatch.
std::vector<EmbeddingVector> embed_batch(const EmbedderConfig& config,
                                         const std::vector<std::string>& texts);

EmbeddingVector embed_one(const EmbedderConfig& config, const std::string& text);

}  // namespace ripple
