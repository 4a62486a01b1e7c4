#include "ripple/vindex.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#ifdef _OPENMP
#endif

#include "ripple/error.hpp"
#include "ripple/hash.hpp"

namespace ripple {
namespace {

constexpr char kMagic[4] = {'R', 'P', 'L', 'X'};

struct Scored {
    double score;
    std::size_t row;
};

// Descending score, then ascending row (== ascending doc_id).
bool ranks_before(const Scored& a, const Scored& b) noexcept {
    if (a.score != b.score) return a.score > b.score;
    return a.row < b.row;
}

void check_query(const VectorIndex& index, const EmbeddingVector& q, std::size_t n) {
    if (q.dim() != index.dim())
        throw ContractError("query dim " + std::to_string(q.dim()) + " != index dim " +
                            std::to_string(index.dim()));
    if (n == 0) throw ArgumentError("query n must be >= 1");
}

std::vector<RankedNeighbor> to_neighbors(const VectorIndex& index, const std::vector<Scored>& top) {
    std::vector<RankedNeighbor> out;
    out.reserve(top.size());
    for (std::size_t i = 0; i < top.size(); ++i) {
        const auto& s = top[i];
        out.push_back({index.doc_id(s.row), index.title(s.row), i + 1,
                       std::clamp(s.score, -1.0, 1.0)});
    }
    return out;
}

class ByteWriter {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> b) : b_(b) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str() {
        std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void expect(const char* p, std::size_t n) {
        need(n);
        if (std::memcmp(b_.data() + pos_, p, n) != 0) throw ParseError("bad index magic", pos_);
        pos_ += n;
    }
    bool done() const noexcept { return pos_ == b_.size(); }
    std::size_t pos() const noexcept { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > b_.size()) throw ParseError("truncated index file", pos_);
    }
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

}  // namespace

VectorIndex VectorIndex::from_entries(std::size_t dim, std::vector<Entry> entries,
                                      std::uint64_t fingerprint) {
    if (dim == 0) throw ArgumentError("index dim must be positive");
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.doc_id < b.doc_id; });
    VectorIndex ix;
    ix.dim_ = dim;
    ix.fingerprint_ = fingerprint;
    ix.ids_.reserve(entries.size());
    ix.titles_.reserve(entries.size());
    ix.matrix_.reserve(entries.size() * dim);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& e = entries[i];
        if (e.vector.dim() != dim)
            throw ContractError("entry " + e.doc_id + " has dim " + std::to_string(e.vector.dim()));
        if (i > 0 && entries[i - 1].doc_id == e.doc_id) throw DuplicateError(e.doc_id);
        if (!ix.by_title_.emplace(e.title, i).second) throw DuplicateError(e.title, "title");
        auto v = e.vector.values();
        ix.matrix_.insert(ix.matrix_.end(), v.begin(), v.end());
        ix.ids_.push_back(std::move(e.doc_id));
        ix.titles_.push_back(std::move(e.title));
    }
    return ix;
}

std::ptrdiff_t VectorIndex::find_title(std::string_view title) const {
    auto it = by_title_.find(std::string(title));
    return it == by_title_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

EmbeddingVector VectorIndex::stored_vector(std::string_view title) const {
    std::ptrdiff_t r = find_title(title);
    if (r < 0) throw NotFoundError(std::string(title));
    auto v = row(static_cast<std::size_t>(r));
    return EmbeddingVector::from_unit(std::vector<float>(v.begin(), v.end()));
}

std::vector<std::uint8_t> VectorIndex::serialize() const {
    ByteWriter w;
    w.raw(kMagic, sizeof kMagic);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(dim_));
    w.u64(ids_.size());
    w.u64(fingerprint_);
    for (std::size_t r = 0; r < ids_.size(); ++r) {
        w.str(ids_[r]);
        w.str(titles_[r]);
        for (float x : row(r)) w.f32(x);
    }
    return w.take();
}

VectorIndex VectorIndex::deserialize(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect(kMagic, sizeof kMagic);
    std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw ParseError("unsupported index version " + std::to_string(version), 4);
    std::size_t dim = r.u32();
    std::uint64_t count = r.u64();
    std::uint64_t fingerprint = r.u64();
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
    for (std::uint64_t i = 0; i < count; ++i) {
        Entry e;
        e.doc_id = r.str();
        e.title = r.str();
        std::vector<float> v(dim);
        for (auto& x : v) x = r.f32();
        e.vector = EmbeddingVector::from_unit(std::move(v));
        entries.push_back(std::move(e));
    }
    if (!r.done()) throw ParseError("trailing bytes after index entries", r.pos());
    return from_entries(dim, std::move(entries), fingerprint);
}

std::string index_text(const Document& doc) { return doc.title + "\n" + doc.body; }

VectorIndex build_index(const Corpus& corpus, const EmbedderConfig& embedder) {
    if (corpus.empty()) throw ArgumentError("cannot index an empty corpus");
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    for (const auto& d : corpus.documents()) texts.push_back(index_text(d));
    std::vector<EmbeddingVector> vecs = embed_batch(embedder, texts);

    std::vector<VectorIndex::Entry> entries;
    entries.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& d = corpus.documents()[i];
        entries.push_back({d.doc_id, d.title, std::move(vecs[i])});
    }
    std::uint64_t fp = fnv1a64(serialize_jsonl(corpus));
    fp = fnv1a64(embedder.fingerprint_text(), fp);
    return VectorIndex::from_entries(embedder.dim, std::move(entries), fp);
}

std::vector<RankedNeighbor> query(const VectorIndex& index, const EmbeddingVector& q, std::size_t n) {
    check_query(index, q, n);
    const std::size_t rows = index.size();
    const std::size_t keep = std::min(n, rows);
    const auto qv = q.values();

    std::vector<Scored> candidates;
#pragma omp parallel
    {
        std::vector<Scored> local;
#pragma omp for schedule(static) nowait
        for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r) {
            const auto row = static_cast<std::size_t>(r);
            local.push_back({cosine(index.row(row), qv), row});
        }
        const std::size_t local_keep = std::min(keep, local.size());
        std::partial_sort(local.begin(), local.begin() + static_cast<std::ptrdiff_t>(local_keep),
                          local.end(), ranks_before);
        local.resize(local_keep);
#pragma omp critical(ripple_query_merge)
        candidates.insert(candidates.end(), local.begin(), local.end());
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), ranks_before);
    candidates.resize(keep);
    return to_neighbors(index, candidates);
}

std::vector<RankedNeighbor> query_serial(const VectorIndex& index, const EmbeddingVector& q,
                                         std::size_t n) {
    check_query(index, q, n);
    std::vector<Scored> all(index.size());
    for (std::size_t r = 0; r < index.size(); ++r) all[r] = {cosine(index.row(r), q.values()), r};
    std::sort(all.begin(), all.end(), ranks_before);
    all.resize(std::min(n, all.size()));
    return to_neighbors(index, all);
}

std::vector<RankedNeighbor> query_by_title(const VectorIndex& index, std::string_view title,
                                           std::size_t n) {
    auto hits = query(index, index.stored_vector(title), n + 1);
    // Duplicate vectors tie with the self-hit; the queried title goes first among them.
    auto self = std::find_if(hits.begin(), hits.end(), [&](const RankedNeighbor& h) { return h.title == title; });
    if (self != hits.end()) {
        auto first = std::find_if(hits.begin(), self,
                                  [&](const RankedNeighbor& h) { return h.similarity == self->similarity; });
        std::rotate(first, self, self + 1);
    }
    if (hits.size() > n) hits.resize(n);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
    return hits;
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
    auto bytes = index.serialize();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

VectorIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return VectorIndex::deserialize(bytes);
}

}  // namespace ripple
