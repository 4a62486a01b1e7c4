#include "ripple/embedder.hpp"

#include <cctype>
#include <cmath>
#include <exception>

#include "ripple/corpus.hpp"
#include "ripple/error.hpp"
#include "ripple/hash.hpp"

namespace ripple {
namespace {

// Pinned seed for the local embedder's token hash; changing it changes every
// stored local-embedder index.
constexpr std::uint64_t kLocalEmbedSeed = fnv1a64("ripple-local-embed-v1");

template <typename T>
EmbeddingVector normalize_impl(std::span<const T> raw, std::vector<float>& out) {
    if (raw.empty()) throw ContractError("cannot normalize an empty vector");
    double sq = 0.0;
    for (T x : raw) sq += static_cast<double>(x) * static_cast<double>(x);
    if (!(sq > 0.0) || !std::isfinite(sq)) throw ContractError("cannot normalize a zero or non-finite vector");
    const double inv = 1.0 / std::sqrt(sq);
    out.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        out[i] = static_cast<float>(static_cast<double>(raw[i]) * inv);
    return EmbeddingVector::from_unit(std::move(out));
}

std::string clip(const std::string& text, std::size_t cap) {
    std::string s = text;
    truncate_utf8(s, cap);
    return s;
}

std::vector<EmbeddingVector> remote_batch(const EmbedderConfig& config,
                                          const std::vector<std::string>& texts,
                                          const std::string& api_key) {
    nlohmann::json body;
    body["model"] = config.model_name;
    body["input"] = nlohmann::json::array();
    for (const auto& t : texts) body["input"].push_back(clip(t, config.max_input_chars));

    nlohmann::json reply = post_json(config.endpoint_url, body, api_key, config.retry);
    if (!reply.contains("data") || !reply["data"].is_array())
        throw ContractError("embedding reply has no data array");
    const auto& data = reply["data"];
    if (data.size() != texts.size())
        throw ContractError("embedding reply has " + std::to_string(data.size()) +
                            " vectors for " + std::to_string(texts.size()) + " inputs");

    std::vector<EmbeddingVector> out(texts.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& item = data[i];
        std::size_t slot = item.contains("index") ? item["index"].get<std::size_t>() : i;
        if (slot >= out.size()) throw ContractError("embedding reply index out of range");
        std::vector<double> raw = item.at("embedding").get<std::vector<double>>();
        if (raw.size() != config.dim)
            throw ContractError("endpoint returned dim " + std::to_string(raw.size()) +
                                ", expected " + std::to_string(config.dim));
        out[slot] = EmbeddingVector::normalize(std::span<const double>(raw));
    }
    return out;
}

}  // namespace

EmbeddingVector EmbeddingVector::normalize(std::span<const double> raw) {
    std::vector<float> out;
    return normalize_impl(raw, out);
}

EmbeddingVector EmbeddingVector::normalize(std::span<const float> raw) {
    std::vector<float> out;
    return normalize_impl(raw, out);
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<float> values) {
    EmbeddingVector v(std::move(values));
    if (v.values_.empty() || std::abs(v.norm() - 1.0) > 1e-6)
        throw ContractError("vector is not unit-norm");
    return v;
}

double EmbeddingVector::norm() const noexcept {
    double sq = 0.0;
    for (float x : values_) sq += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(sq);
}

double cosine(std::span<const float> a, std::span<const float> b) noexcept {
    double dot = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return dot;
}

void EmbedderConfig::validate() const {
    if (dim == 0) throw ArgumentError("embedder dim must be positive");
    if (batch_size == 0) throw ArgumentError("embedder batch_size must be positive");
    if (max_input_chars == 0) throw ArgumentError("embedder max_input_chars must be positive");
    if (batch_parallelism == 0) throw ArgumentError("embedder batch_parallelism must be positive");
    if (kind == EmbedderKind::remote && endpoint_url.empty())
        throw ArgumentError("remote embedder requires endpoint_url");
    if (kind == EmbedderKind::local_deterministic && dim < 8)
        throw ArgumentError("local embedder requires dim >= 8");
}

std::string EmbedderConfig::fingerprint_text() const {
    return std::string(kind == EmbedderKind::remote ? "remote" : "local") + "|" + model_name + "|" +
           std::to_string(dim) + "|" + std::to_string(max_input_chars);
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::size_t local_embed_bucket(std::string_view token, std::size_t dim) noexcept {
    return static_cast<std::size_t>(fnv1a64(token, kLocalEmbedSeed) % dim);
}

EmbeddingVector local_hash_embed(std::string_view text, std::size_t dim) {
    if (dim < 8) throw ArgumentError("local_hash_embed requires dim >= 8");
    std::vector<double> counts(dim, 0.0);
    bool any = false;
    for (const auto& tok : tokenize(text)) {
        counts[local_embed_bucket(tok, dim)] += 1.0;
        any = true;
    }
    if (!any) counts[0] = 1.0;
    return EmbeddingVector::normalize(std::span<const double>(counts));
}

std::vector<EmbeddingVector> embed_batch(const EmbedderConfig& config,
                                         const std::vector<std::string>& texts) {
    config.validate();
    if (texts.empty()) throw ArgumentError("embed_batch needs at least one text");

    if (config.kind == EmbedderKind::local_deterministic) {
        std::vector<EmbeddingVector> out(texts.size());
        const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[i] = local_hash_embed(clip(texts[i], config.max_input_chars), config.dim);
        return out;
    }

    const std::string api_key = env_or_empty(kEmbedApiKeyEnv);
    const std::size_t n_batches = (texts.size() + config.batch_size - 1) / config.batch_size;
    std::vector<std::vector<EmbeddingVector>> results(n_batches);
    std::vector<std::exception_ptr> errors(n_batches);
    const auto nb = static_cast<std::ptrdiff_t>(n_batches);
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(config.batch_parallelism))
    for (std::ptrdiff_t b = 0; b < nb; ++b) {
        try {
            const std::size_t lo = static_cast<std::size_t>(b) * config.batch_size;
            const std::size_t hi = std::min(texts.size(), lo + config.batch_size);
            std::vector<std::string> chunk(texts.begin() + lo, texts.begin() + hi);
            results[b] = remote_batch(config, chunk, api_key);
        } catch (...) {
            errors[b] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (auto& r : results)
        for (auto& v : r) out.push_back(std::move(v));
    return out;
}

EmbeddingVector embed_one(const EmbedderConfig& config, const std::string& text) {
    return embed_batch(config, {text}).front();
}

}  // namespace ripple
