#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ripple/chat.hpp"
#include "ripple/corpus.hpp"
#include "ripple/distance.hpp"
#include "ripple/embedder.hpp"
#include "ripple/vindex.hpp"

namespace ripple {

struct SourceQuestion {
    std::string qid;
    std::string text;
    std::vector<std::string> choices;
    std::string domain_tag;
};

/// JSONL with `question` (or `text`), optional `qid`/`id`, `choices`, `domain`.
std::vector<SourceQuestion> load_source_questions(const std::filesystem::path& path);

enum class TopicResolution { matched_title, free_text };

struct TopicRecord {
    std::string topic;
    std::vector<std::string> source_qids;
    TopicResolution resolution = TopicResolution::free_text;
    std::string resolved_title;  // set for matched_title
};

/// A work item that was dropped without failing the surrounding batch.
struct Skip {
    std::string stage;  // "topic", "resolve", "facts", "mcq", "refusal"
    std::string key;
    std::string reason;
};

struct FactSet {
    std::string topic;
    std::string doc_id;
    std::vector<std::string> facts;
    std::string extraction_model;
};

struct McqProvenance {
    std::string generator_model;
    std::vector<std::size_t> fact_indices;
    std::string prompt_hash;
    int repair_attempts = 0;
};

struct MCQItem {
    std::string item_id;
    std::string target_qid;
    std::string topic;
    std::size_t semantic_distance = 0;
    std::string stem;
    std::array<std::string, 4> choices;
    int answer_index = 0;
    McqProvenance provenance;
};

struct DatasetStats {
    std::size_t topics = 0;
    std::size_t questions = 0;
};

struct RippleDataset {
    std::string dataset_id;
    std::vector<MCQItem> items;
    std::vector<TopicRecord> targets;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    DatasetStats stats;
    std::vector<Skip> skips;

    void recompute_stats();
};

inline constexpr std::size_t kMaxTopicChars = 200;

/// Throws PreconditionError on empty text, ExtractionError on an empty or
/// over-long reply; transport errors propagate.
TopicRecord extract_topic(const ChatClient& client, const SourceQuestion& q);

struct TopicBatch {
    std::vector<TopicRecord> records;  // merged by topic, first-appearance order
    std::vector<Skip> skipped;
};
TopicBatch extract_topics(const ChatClient& client, const std::vector<SourceQuestion>& questions);

/// Keeps single sentences of <= 300 chars that share a content word with the
/// article. Throws PreconditionError on an empty body, EmptyFactsError when
/// nothing survives.
FactSet extract_facts(const ChatClient& client, const Document& doc, std::size_t max_facts);

struct McqRejection {
    std::size_t ordinal = 0;
    std::string reason;
};

struct McqBatch {
    std::vector<MCQItem> items;
    std::vector<McqRejection> rejected;
};

inline constexpr int kMcqRepairAttempts = 2;

/// k items from one fact set; each reply is validated and re-prompted up to
/// twice with the validator error before rejection. The correct choice is
/// moved to a position drawn from (rng_seed, topic, ordinal).
McqBatch generate_mcqs(const ChatClient& client, const FactSet& facts, std::size_t k,
                       std::uint64_t rng_seed);

/// Parses and checks one model reply against the item wire schema. Returns
/// the error text, or nullopt when `out` was filled.
std::optional<std::string> parse_mcq_reply(const std::string& reply, const FactSet& facts, MCQItem& out);

const std::vector<std::string>& default_refusal_patterns();

struct RemovedTopic {
    std::string topic;
    std::string pattern;
    std::size_t n_items = 0;
};

struct RefusalResult {
    std::vector<MCQItem> kept;
    std::vector<RemovedTopic> removed;
};

/// Drops every item of a topic whose items or topic text contain a refusal
/// marker (case-insensitive).
RefusalResult refusal_filter(const std::vector<std::string>& patterns, std::vector<MCQItem> items,
                             const std::map<std::string, std::string>& topic_texts);

struct BuildConfig {
    std::string dataset_id = "ripple-dataset";
    std::size_t n_retrieve = 1000;
    std::size_t rank_step = 5;
    std::size_t k = 5;
    std::size_t max_facts = 10;
    double min_resolve_similarity = 0.5;
    std::size_t parallelism = 1;
    EmbedderConfig embedder;
    std::vector<std::string> refusal_patterns = default_refusal_patterns();

    void validate() const;
};

/// Topic extraction -> neighbor lists -> facts -> MCQs -> refusal filter.
/// Per-topic failures become skips. With a deterministic client the result
/// is a pure function of the inputs and the seed.
RippleDataset build_dataset(const Corpus& corpus, const VectorIndex& index,
                            const std::vector<SourceQuestion>& sources, const BuildConfig& config,
                            const ChatClient& client, std::uint64_t rng_seed);

// Dataset wire format (dataset_io.cpp).
nlohmann::ordered_json item_to_json(const MCQItem& item);
MCQItem item_from_json(const nlohmann::json& j);
/// Schema check for one dataset line; nullopt when valid.
std::optional<std::string> validate_item_json(const nlohmann::json& j);

std::string serialize_dataset_jsonl(const RippleDataset& dataset);
/// Writes `<path>` (one item per line) and `<path>.meta.json`.
void write_dataset(const RippleDataset& dataset, const std::filesystem::path& path);
/// Reads items, and targets/config/skips from the sidecar when present.
RippleDataset read_dataset(const std::filesystem::path& path);

std::filesystem::path dataset_meta_path(const std::filesystem::path& path);

}  // namespace ripple
