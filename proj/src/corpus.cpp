#include "ripple/corpus.hpp"

#include <expat.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <type_traits>
#include <nlohmann/json.hpp>

#include "ripple/error.hpp"
#include "ripple/hash.hpp"

namespace ripple {
namespace {

std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

constexpr std::array<std::string_view, 14> kNonArticlePrefixes = {
    "Talk:",     "User:",   "User talk:", "Wikipedia:", "File:",   "MediaWiki:", "Template:",
    "Help:",     "Category:", "Portal:",  "Draft:",     "Module:", "TimedText:", "Special:"};

bool has_namespace_prefix(std::string_view title) {
    return std::any_of(kNonArticlePrefixes.begin(), kNonArticlePrefixes.end(),
                       [&](std::string_view p) { return title.starts_with(p); });
}

// Streaming state for one <page> element of a MediaWiki export.
struct DumpReader {
    enum class Field { none, title, ns, page_id, text };

    IngestLimits limits;
    std::vector<Document> docs;
    std::unordered_map<std::string, bool> seen_titles;
    XML_Parser parser = nullptr;

    int depth = 0;
    int page_depth = -1;
    bool in_revision = false;
    Field field = Field::none;
    std::string buf;

    std::string title, ns, page_id, text;
    bool redirect_element = false;
    bool stopped = false;

    void reset_page() {
        title.clear();
        ns.clear();
        page_id.clear();
        text.clear();
        redirect_element = false;
        in_revision = false;
    }

    void start(std::string_view name) {
        ++depth;
        if (name == "page") {
            page_depth = depth;
            reset_page();
            return;
        }
        if (page_depth < 0) return;
        if (name == "revision") in_revision = true;
        else if (name == "redirect") redirect_element = true;
        else if (name == "title" && depth == page_depth + 1) field = Field::title;
        else if (name == "ns" && depth == page_depth + 1) field = Field::ns;
        else if (name == "id" && depth == page_depth + 1) field = Field::page_id;
        else if (name == "text" && in_revision) field = Field::text;
        buf.clear();
    }

    void end(std::string_view name) {
        if (page_depth >= 0) {
            switch (field) {
                case Field::title: title = buf; break;
                case Field::ns: ns = buf; break;
                case Field::page_id: page_id = buf; break;
                case Field::text: text = buf; break;
                case Field::none: break;
            }
            field = Field::none;
            if (name == "revision") in_revision = false;
            if (name == "page" && depth == page_depth) {
                finish_page();
                page_depth = -1;
            }
        }
        --depth;
    }

    void finish_page() {
        if (title.empty()) return;
        if (!ns.empty() && ns != "0") return;
        if (ns.empty() && has_namespace_prefix(title)) return;
        if (redirect_element || is_redirect_text(text)) return;
        if (is_disambiguation_title(title)) return;
        if (seen_titles.count(title)) return;
        Document doc;
        doc.doc_id = page_id.empty() ? hex64(fnv1a64(title)) : page_id;
        doc.title = title;
        doc.body = strip_wikitext(text);
        if (doc.body.empty()) return;
        doc.truncated = truncate_utf8(doc.body, limits.max_chars);
        doc.char_count = doc.body.size();
        seen_titles.emplace(title, true);
        docs.push_back(std::move(doc));
        if (limits.max_docs && docs.size() >= *limits.max_docs) {
            XML_StopParser(parser, XML_FALSE);
            stopped = true;
        }
    }
};

void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char**) {
    static_cast<DumpReader*>(user)->start(name);
}

void XMLCALL on_end(void* user, const XML_Char* name) {
    static_cast<DumpReader*>(user)->end(name);
}

void XMLCALL on_chars(void* user, const XML_Char* s, int len) {
    auto* r = static_cast<DumpReader*>(user);
    if (r->field != DumpReader::Field::none) r->buf.append(s, static_cast<std::size_t>(len));
}

void check_limits(const IngestLimits& limits) {
    if (limits.max_docs && *limits.max_docs == 0) throw ArgumentError("max_docs must be positive");
    if (limits.max_chars == 0) throw ArgumentError("max_chars must be positive");
}

}  // namespace

bool truncate_utf8(std::string& body, std::size_t cap) {
    if (body.size() <= cap) return false;
    std::size_t cut = cap;
    while (cut > 0 && (static_cast<unsigned char>(body[cut]) & 0xC0) == 0x80) --cut;
    body.resize(cut);
    return true;
}

Corpus Corpus::from_documents(std::vector<Document> docs, std::string corpus_id,
                              std::string source_descriptor) {
    std::sort(docs.begin(), docs.end(),
              [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
    Corpus c;
    c.by_id_.reserve(docs.size());
    c.by_title_.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        docs[i].char_count = docs[i].body.size();
        if (!c.by_id_.emplace(docs[i].doc_id, i).second) throw DuplicateError(docs[i].doc_id);
        if (!c.by_title_.emplace(docs[i].title, i).second)
            throw DuplicateError(docs[i].title, "title");
        if (docs[i].truncated) ++c.truncated_count_;
    }
    c.docs_ = std::move(docs);
    c.corpus_id_ = std::move(corpus_id);
    c.source_descriptor_ = std::move(source_descriptor);
    c.created_at_ = utc_timestamp();
    return c;
}

const Document* Corpus::find_title(std::string_view title) const {
    auto it = by_title_.find(std::string(title));
    return it == by_title_.end() ? nullptr : &docs_[it->second];
}

const Document* Corpus::find_id(std::string_view doc_id) const {
    auto it = by_id_.find(std::string(doc_id));
    return it == by_id_.end() ? nullptr : &docs_[it->second];
}

std::optional<Document> get_by_title(const Corpus& corpus, std::string_view title) {
    if (const Document* d = corpus.find_title(title)) return *d;
    return std::nullopt;
}

Corpus ingest_xml_dump(const std::filesystem::path& path, const IngestLimits& limits) {
    check_limits(limits);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    if (in.peek() == std::ifstream::traits_type::eof())
        throw EmptyCorpusError("no articles extracted from " + path.string() + " (empty file)");

    DumpReader reader;
    reader.limits = limits;
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
        XML_ParserCreate("UTF-8"), &XML_ParserFree);
    reader.parser = parser.get();
    XML_SetUserData(parser.get(), &reader);
    XML_SetElementHandler(parser.get(), on_start, on_end);
    XML_SetCharacterDataHandler(parser.get(), on_chars);

    std::vector<char> chunk(1 << 16);
    for (;;) {
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        std::streamsize got = in.gcount();
        bool last = got < static_cast<std::streamsize>(chunk.size());
        if (XML_Parse(parser.get(), chunk.data(), static_cast<int>(got), last) == XML_STATUS_ERROR) {
            if (reader.stopped) break;
            throw ParseError(std::string("malformed XML: ") +
                                 XML_ErrorString(XML_GetErrorCode(parser.get())),
                             static_cast<std::uint64_t>(XML_GetCurrentByteIndex(parser.get())));
        }
        if (last || reader.stopped) break;
    }
    if (reader.docs.empty())
        throw EmptyCorpusError("no articles extracted from " + path.string());
    return Corpus::from_documents(std::move(reader.docs), path.stem().string(), path.string());
}

Corpus ingest_jsonl(const std::filesystem::path& path, const IngestLimits& limits) {
    check_limits(limits);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    std::vector<Document> docs;
    std::unordered_map<std::string, bool> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        if (!j.is_object()) throw SchemaError("expected a JSON object", lineno);
        for (const char* key : {"id", "title", "text"}) {
            if (!j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'", lineno);
            if (!j[key].is_string())
                throw SchemaError(std::string("field '") + key + "' must be a string", lineno);
        }
        Document doc;
        doc.doc_id = j["id"].get<std::string>();
        doc.title = j["title"].get<std::string>();
        doc.body = j["text"].get<std::string>();
        if (!ids.emplace(doc.doc_id, true).second) throw DuplicateError(doc.doc_id);
        doc.truncated = truncate_utf8(doc.body, limits.max_chars);
        doc.char_count = doc.body.size();
        docs.push_back(std::move(doc));
        if (limits.max_docs && docs.size() >= *limits.max_docs) break;
    }
    if (docs.empty()) throw EmptyCorpusError("no documents in " + path.string());
    return Corpus::from_documents(std::move(docs), path.stem().string(), path.string());
}

std::string serialize_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& d : corpus.documents()) {
        nlohmann::ordered_json j;
        j["id"] = d.doc_id;
        j["title"] = d.title;
        j["text"] = d.body;
        out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << serialize_jsonl(corpus);
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ripple
