#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ripple {

/// One article of the underlying-knowledge corpus. `body` is plain text.
struct Document {
    std::string doc_id;
    std::string title;
    std::string body;
    std::size_t char_count = 0;  // == body.size() (UTF-8 bytes)
    bool truncated = false;

    friend bool operator==(const Document&, const Document&) = default;
};

inline constexpr std::size_t kDefaultIngestCap = 200'000;

struct IngestLimits {
    std::optional<std::size_t> max_docs;
    std::size_t max_chars = kDefaultIngestCap;  // per-document truncation cap
};

/// Immutable, id-sorted document collection. Safe to share across readers.
class Corpus {
public:
    Corpus() = default;

    /// Sorts by doc_id and enforces id/title uniqueness (DuplicateError).
    static Corpus from_documents(std::vector<Document> docs, std::string corpus_id = {},
                                 std::string source_descriptor = {});

    const std::vector<Document>& documents() const noexcept { return docs_; }
    std::size_t size() const noexcept { return docs_.size(); }
    bool empty() const noexcept { return docs_.empty(); }

    const Document* find_title(std::string_view title) const;
    const Document* find_id(std::string_view doc_id) const;

    const std::string& corpus_id() const noexcept { return corpus_id_; }
    const std::string& created_at() const noexcept { return created_at_; }
    const std::string& source_descriptor() const noexcept { return source_descriptor_; }
    std::size_t truncated_count() const noexcept { return truncated_count_; }

    friend bool operator==(const Corpus& a, const Corpus& b) { return a.docs_ == b.docs_; }

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_title_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::string corpus_id_;
    std::string created_at_;
    std::string source_descriptor_;
    std::size_t truncated_count_ = 0;
};

/// Wikitext to plain text. Idempotent: strip_wikitext(strip_wikitext(x)) == strip_wikitext(x).
std::string strip_wikitext(std::string_view wikitext);

bool is_redirect_text(std::string_view wikitext);
bool is_disambiguation_title(std::string_view title);

/// Truncates `body` to at most `cap` bytes without splitting a UTF-8 sequence.
/// Returns true when something was cut.
bool truncate_utf8(std::string& body, std::size_t cap);

Corpus ingest_xml_dump(const std::filesystem::path& path, const IngestLimits& limits = {});
Corpus ingest_jsonl(const std::filesystem::path& path, const IngestLimits& limits = {});

std::optional<Document> get_by_title(const Corpus& corpus, std::string_view title);

/// Canonical JSONL serialization: {"id","title","text"} per line, id order.
std::string serialize_jsonl(const Corpus& corpus);
void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace ripple
