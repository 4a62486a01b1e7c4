#include "ripple/genpipe.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "ripple/error.hpp"
#include "ripple/hash.hpp"
#include "ripple/text.hpp"

namespace ripple {
namespace {

constexpr std::size_t kMaxPromptBodyChars = 12'000;

std::string strip_code_fence(const std::string& reply) {
    std::string s = text::trim(reply);
    if (s.rfind("```", 0) != 0) return s;
    auto nl = s.find('\n');
    auto end = s.rfind("```");
    if (nl == std::string::npos || end <= nl) return s;
    return text::trim(std::string_view(s).substr(nl + 1, end - nl - 1));
}

std::string strip_list_marker(std::string s) {
    std::size_t i = 0;
    while (i < s.size() && (s[i] == '-' || s[i] == '*' || s[i] == ' ')) ++i;
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i && j < s.size() && (s[j] == '.' || s[j] == ')')) i = j + 1;
    return text::trim(std::string_view(s).substr(i));
}

std::vector<std::string> parse_fact_reply(const std::string& reply) {
    std::string body = strip_code_fence(reply);
    if (!body.empty() && body.front() == '[') {
        try {
            auto j = nlohmann::json::parse(body);
            std::vector<std::string> out;
            for (const auto& e : j)
                if (e.is_string()) out.push_back(e.get<std::string>());
            return out;
        } catch (const nlohmann::json::exception&) {
        }
    }
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= body.size()) {
        auto nl = body.find('\n', start);
        std::string line = body.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
        line = strip_list_marker(text::trim(line));
        if (!line.empty()) out.push_back(std::move(line));
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    return out;
}

std::string facts_numbered(const std::vector<std::string>& facts) {
    std::string out;
    for (std::size_t i = 0; i < facts.size(); ++i)
        out += std::to_string(i + 1) + ". " + facts[i] + "\n";
    return out;
}

std::string choices_lettered(const std::vector<std::string>& choices) {
    std::string out;
    for (std::size_t i = 0; i < choices.size(); ++i) {
        out += static_cast<char>('A' + i % 26);
        out += ". " + choices[i] + "\n";
    }
    return out;
}

// Fisher-Yates over the four slots from a counter stream; returns the new
// position of the original slot 0.
int shuffle_choices(std::array<std::string, 4>& choices, int answer, std::uint64_t seed) {
    std::array<int, 4> order{0, 1, 2, 3};
    for (std::uint64_t i = 3; i > 0; --i) {
        auto j = bounded(seed, i, i + 1);
        std::swap(order[i], order[j]);
    }
    std::array<std::string, 4> shuffled;
    int new_answer = 0;
    for (int pos = 0; pos < 4; ++pos) {
        shuffled[pos] = std::move(choices[order[pos]]);
        if (order[pos] == answer) new_answer = pos;
    }
    choices = std::move(shuffled);
    return new_answer;
}

}  // namespace

void RippleDataset::recompute_stats() {
    std::set<std::string> topics;
    for (const auto& it : items) topics.insert(it.topic);
    stats.topics = topics.size();
    stats.questions = items.size();
}

std::vector<SourceQuestion> load_source_questions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<SourceQuestion> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        SourceQuestion q;
        if (j.contains("qid")) q.qid = j["qid"].is_string() ? j["qid"].get<std::string>() : j["qid"].dump();
        else if (j.contains("id")) q.qid = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
        else q.qid = "q" + std::to_string(lineno);
        const char* text_key = j.contains("question") ? "question" : "text";
        if (!j.contains(text_key) || !j[text_key].is_string())
            throw SchemaError("missing field 'question'", lineno);
        q.text = j[text_key].get<std::string>();
        if (j.contains("choices") && j["choices"].is_array())
            for (const auto& c : j["choices"]) q.choices.push_back(c.is_string() ? c.get<std::string>() : c.dump());
        if (j.contains("domain") && j["domain"].is_string()) q.domain_tag = j["domain"].get<std::string>();
        if (!seen.insert(q.qid).second) throw DuplicateError(q.qid, "qid");
        out.push_back(std::move(q));
    }
    return out;
}

TopicRecord extract_topic(const ChatClient& client, const SourceQuestion& q) {
    if (text::trim(q.text).empty()) throw PreconditionError("question " + q.qid + " has empty text");
    const auto& tmpl = prompt_template("topic_v1");
    ChatRequest req;
    req.task = task::topic;
    req.vars = {{"key", q.text}, {"question", q.text}, {"choices", choices_lettered(q.choices)}};
    req.prompt = tmpl.render(req.vars);

    std::string reply = text::trim(client.complete(req));
    // Tolerate a trailing period and surrounding quotes.
    if (!reply.empty() && reply.back() == '.') reply.pop_back();
    if (reply.size() >= 2 && reply.front() == '"' && reply.back() == '"') reply = reply.substr(1, reply.size() - 2);
    reply = text::trim(reply);
    if (reply.empty()) throw ExtractionError("empty topic reply for " + q.qid);
    if (reply.size() > kMaxTopicChars || reply.find('\n') != std::string::npos)
        throw ExtractionError("over-long topic reply for " + q.qid);

    TopicRecord rec;
    rec.topic = reply;
    rec.source_qids = {q.qid};
    return rec;
}

TopicBatch extract_topics(const ChatClient& client, const std::vector<SourceQuestion>& questions) {
    TopicBatch batch;
    std::map<std::string, std::size_t> by_topic;
    for (const auto& q : questions) {
        try {
            TopicRecord rec = extract_topic(client, q);
            auto [it, fresh] = by_topic.emplace(rec.topic, batch.records.size());
            if (fresh) batch.records.push_back(std::move(rec));
            else batch.records[it->second].source_qids.push_back(q.qid);
        } catch (const Error& e) {
            spdlog::warn("topic extraction skipped {}: {}", q.qid, e.what());
            batch.skipped.push_back({"topic", q.qid, e.what()});
        }
    }
    return batch;
}

FactSet extract_facts(const ChatClient& client, const Document& doc, std::size_t max_facts) {
    if (text::trim(doc.body).empty()) throw PreconditionError("document " + doc.doc_id + " has an empty body");
    if (max_facts == 0) throw ArgumentError("max_facts must be positive");

    std::string body = doc.body;
    truncate_utf8(body, kMaxPromptBodyChars);
    const auto& tmpl = prompt_template("facts_v1");
    ChatRequest req;
    req.task = task::facts;
    req.vars = {{"key", doc.title},
                {"title", doc.title},
                {"body", body},
                {"max_facts", std::to_string(max_facts)}};
    req.prompt = tmpl.render(req.vars);

    const auto article_words = text::content_words(doc.body);
    FactSet out;
    out.topic = doc.title;
    out.doc_id = doc.doc_id;
    out.extraction_model = client.model_name();
    for (auto& fact : parse_fact_reply(client.complete(req))) {
        if (out.facts.size() >= max_facts) break;
        fact = text::trim(fact);
        if (fact.empty() || fact.size() > 300) continue;
        if (text::split_sentences(fact).size() != 1) continue;
        auto fw = text::content_words(fact);
        bool grounded = std::any_of(fw.begin(), fw.end(),
                                    [&](const std::string& w) { return article_words.count(w) > 0; });
        if (!grounded) continue;
        out.facts.push_back(std::move(fact));
    }
    if (out.facts.empty()) throw EmptyFactsError("no grounded facts for " + doc.title);
    return out;
}

std::optional<std::string> parse_mcq_reply(const std::string& reply, const FactSet& facts, MCQItem& out) {
    std::string body = strip_code_fence(reply);
    auto open = body.find('{');
    auto close = body.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
        return "reply is not a JSON object";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body.substr(open, close - open + 1));
    } catch (const nlohmann::json::parse_error& e) {
        return std::string("reply is not valid JSON: ") + e.what();
    }
    if (!j.contains("question") || !j["question"].is_string() || text::trim(j["question"].get<std::string>()).empty())
        return "missing non-empty string field 'question'";
    if (!j.contains("choices") || !j["choices"].is_array()) return "missing array field 'choices'";
    if (j["choices"].size() != 4)
        return "expected exactly 4 choices, got " + std::to_string(j["choices"].size());
    std::array<std::string, 4> choices;
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < 4; ++i) {
        if (!j["choices"][i].is_string()) return "choice " + std::to_string(i) + " is not a string";
        choices[i] = text::trim(j["choices"][i].get<std::string>());
        if (choices[i].empty()) return "choice " + std::to_string(i) + " is empty";
        distinct.insert(text::to_lower(choices[i]));
    }
    if (distinct.size() != 4) return "choices are not distinct";
    if (!j.contains("answer")) return "missing field 'answer'";
    int answer = -1;
    const auto& a = j["answer"];
    if (a.is_number_integer()) {
        answer = a.get<int>();
    } else if (a.is_string()) {
        std::string s = text::trim(a.get<std::string>());
        if (s.size() == 1 && std::toupper(static_cast<unsigned char>(s[0])) >= 'A' &&
            std::toupper(static_cast<unsigned char>(s[0])) <= 'D')
            answer = std::toupper(static_cast<unsigned char>(s[0])) - 'A';
    }
    if (answer < 0 || answer > 3) return "answer is not an index in [0,3] or a letter A-D";

    std::string stem = text::trim(j["question"].get<std::string>());
    auto stem_words = text::content_words(stem);
    auto relevant = text::content_words(facts.topic);
    for (const auto& f : facts.facts) relevant.merge(text::content_words(f));
    bool on_topic = std::any_of(stem_words.begin(), stem_words.end(),
                                [&](const std::string& w) { return relevant.count(w) > 0; });
    if (!on_topic) return "question shares no content word with the topic or its facts";

    out.topic = facts.topic;
    out.stem = std::move(stem);
    out.choices = std::move(choices);
    out.answer_index = answer;
    return std::nullopt;
}

McqBatch generate_mcqs(const ChatClient& client, const FactSet& facts, std::size_t k, std::uint64_t rng_seed) {
    if (facts.facts.empty()) throw PreconditionError("generate_mcqs needs a non-empty fact set");
    if (k == 0) throw ArgumentError("k must be >= 1");

    const auto& tmpl = prompt_template("mcq_v1");
    const std::string facts_json = nlohmann::json(facts.facts).dump(-1, ' ', false,
                                                                   nlohmann::json::error_handler_t::replace);
    const std::uint64_t topic_seed = mix(rng_seed, fnv1a64(facts.topic));
    McqBatch batch;
    for (std::size_t ordinal = 0; ordinal < k; ++ordinal) {
        const std::size_t fact_index = ordinal % facts.facts.size();
        ChatRequest req;
        req.task = task::mcq;
        req.vars = {{"key", facts.topic + "#" + std::to_string(ordinal)},
                    {"topic", facts.topic},
                    {"facts", facts_numbered(facts.facts)},
                    {"facts_json", facts_json},
                    {"fact_index", std::to_string(fact_index)}};

        MCQItem item;
        std::optional<std::string> error;
        int attempt = 0;
        for (; attempt <= kMcqRepairAttempts; ++attempt) {
            if (error) {
                req.vars["repair_error"] = *error;
                req.vars["repair_note"] = "\nYour previous reply was rejected: " + *error +
                                          "\nReply again with the JSON object only.";
            }
            req.prompt = tmpl.render(req.vars);
            error = parse_mcq_reply(client.complete(req), facts, item);
            if (!error) break;
        }
        if (error) {
            spdlog::info("mcq rejected for '{}' #{}: {}", facts.topic, ordinal, *error);
            batch.rejected.push_back({ordinal, *error});
            continue;
        }
        item.answer_index = shuffle_choices(item.choices, item.answer_index, mix(topic_seed, ordinal));
        item.provenance.generator_model = client.model_name();
        item.provenance.fact_indices = {fact_index};
        item.provenance.prompt_hash = tmpl.hash;
        item.provenance.repair_attempts = attempt;
        batch.items.push_back(std::move(item));
    }
    return batch;
}

const std::vector<std::string>& default_refusal_patterns() {
    static const std::vector<std::string> patterns = {"I cannot provide", "I can't help", "as an AI",
                                                      "I can't provide", "I cannot help", "I'm sorry, but"};
    return patterns;
}

RefusalResult refusal_filter(const std::vector<std::string>& patterns, std::vector<MCQItem> items,
                             const std::map<std::string, std::string>& topic_texts) {
    auto match = [&](std::string_view s) -> const std::string* {
        for (const auto& p : patterns)
            if (text::contains_icase(s, p)) return &p;
        return nullptr;
    };

    std::map<std::string, std::string> flagged;  // topic -> pattern
    for (const auto& [topic, body] : topic_texts)
        if (const auto* p = match(body)) flagged.emplace(topic, *p);
    for (const auto& it : items) {
        if (flagged.count(it.topic)) continue;
        const std::string* p = match(it.stem);
        for (const auto& c : it.choices)
            if (!p) p = match(c);
        if (p) flagged.emplace(it.topic, *p);
    }

    RefusalResult out;
    std::map<std::string, std::size_t> removed_counts;
    for (auto& it : items) {
        if (flagged.count(it.topic)) ++removed_counts[it.topic];
        else out.kept.push_back(std::move(it));
    }
    for (const auto& [topic, pattern] : flagged) {
        std::size_t n = removed_counts.count(topic) ? removed_counts[topic] : 0;
        spdlog::warn("refusal filter removed topic '{}' ({} items) matching \"{}\"", topic, n, pattern);
        out.removed.push_back({topic, pattern, n});
    }
    return out;
}

void BuildConfig::validate() const {
    DistanceConfig{n_retrieve, rank_step, true, QueryMode::by_stored_title}.validate();
    if (k == 0) throw ArgumentError("k must be >= 1");
    if (max_facts == 0) throw ArgumentError("max_facts must be >= 1");
    if (parallelism == 0) throw ArgumentError("parallelism must be >= 1");
    embedder.validate();
}

RippleDataset build_dataset(const Corpus& corpus, const VectorIndex& index,
                            const std::vector<SourceQuestion>& sources, const BuildConfig& config,
                            const ChatClient& client, std::uint64_t rng_seed) {
    config.validate();
    if (index.dim() != config.embedder.dim)
        throw ContractError("index dim " + std::to_string(index.dim()) + " != embedder dim " +
                            std::to_string(config.embedder.dim));

    RippleDataset ds;
    ds.dataset_id = config.dataset_id;

    // Step 1: topics.
    TopicBatch topics = extract_topics(client, sources);
    ds.skips = std::move(topics.skipped);

    // Step 2: resolve each topic and retrieve its sampled neighbors.
    struct Target {
        TopicRecord record;
        NeighborList neighbors;
    };
    std::vector<Target> targets;
    for (auto& rec : topics.records) {
        try {
            QueryMode mode = QueryMode::by_free_text;
            std::string query_text = rec.topic;
            if (corpus.find_title(rec.topic) && index.find_title(rec.topic) >= 0) {
                mode = QueryMode::by_stored_title;
                rec.resolved_title = rec.topic;
            } else {
                auto top = query(index, embed_one(config.embedder, rec.topic), 1);
                if (!top.empty() && top.front().similarity >= config.min_resolve_similarity) {
                    mode = QueryMode::by_stored_title;
                    rec.resolved_title = top.front().title;
                    query_text = top.front().title;
                }
            }
            rec.resolution = mode == QueryMode::by_stored_title ? TopicResolution::matched_title
                                                                : TopicResolution::free_text;
            auto dcfg = DistanceConfig::for_mode(mode, config.n_retrieve, config.rank_step);
            targets.push_back({rec, neighbor_list(index, config.embedder, query_text, dcfg)});
        } catch (const Error& e) {
            spdlog::warn("target '{}' skipped: {}", rec.topic, e.what());
            ds.skips.push_back({"resolve", rec.topic, e.what()});
        }
    }

    // Step 3: facts and questions once per unique neighbor topic.
    std::map<std::string, std::string> topic_doc;  // title -> doc_id, sorted by title
    for (const auto& t : targets)
        for (const auto& n : t.neighbors.neighbors) topic_doc.emplace(n.title, n.doc_id);
    std::vector<std::pair<std::string, std::string>> work(topic_doc.begin(), topic_doc.end());

    struct TopicOutput {
        std::vector<MCQItem> items;
        std::string fact_text;
        std::vector<Skip> skips;
    };
    std::vector<TopicOutput> outputs(work.size());
    const auto n_work = static_cast<std::ptrdiff_t>(work.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(config.parallelism))
    for (std::ptrdiff_t w = 0; w < n_work; ++w) {
        const auto& [title, doc_id] = work[w];
        auto& out = outputs[w];
        try {
            const Document* doc = corpus.find_id(doc_id);
            if (!doc) throw NotFoundError("document " + doc_id + " for topic " + title);
            FactSet facts = extract_facts(client, *doc, config.max_facts);
            for (const auto& f : facts.facts) out.fact_text += f + "\n";
            McqBatch batch = generate_mcqs(client, facts, config.k, rng_seed);
            for (const auto& r : batch.rejected)
                out.skips.push_back({"mcq", title + "#" + std::to_string(r.ordinal), r.reason});
            out.items = std::move(batch.items);
        } catch (const EmptyFactsError& e) {
            out.skips.push_back({"facts", title, e.what()});
        } catch (const Error& e) {
            out.skips.push_back({"mcq", title, e.what()});
        } catch (const std::exception& e) {
            out.skips.push_back({"mcq", title, std::string("unexpected: ") + e.what()});
        }
    }

    std::vector<MCQItem> generated;
    std::map<std::string, std::string> topic_texts;
    for (std::size_t w = 0; w < outputs.size(); ++w) {
        auto& out = outputs[w];
        ds.skips.insert(ds.skips.end(), out.skips.begin(), out.skips.end());
        topic_texts[work[w].first] = std::move(out.fact_text);
        for (auto& it : out.items) generated.push_back(std::move(it));
    }
    RefusalResult filtered = refusal_filter(config.refusal_patterns, std::move(generated), topic_texts);
    for (const auto& r : filtered.removed)
        ds.skips.push_back({"refusal", r.topic, "matched \"" + r.pattern + "\""});

    std::map<std::string, std::vector<const MCQItem*>> by_topic;
    for (const auto& it : filtered.kept) by_topic[it.topic].push_back(&it);

    // Assembly: (target, rank, ordinal) order; duplicates across targets stay.
    for (const auto& t : targets) {
        const std::string target_qid = t.record.source_qids.front();
        for (const auto& n : t.neighbors.neighbors) {
            auto found = by_topic.find(n.title);
            if (found == by_topic.end()) continue;
            for (std::size_t j = 0; j < found->second.size(); ++j) {
                MCQItem item = *found->second[j];
                item.target_qid = target_qid;
                item.semantic_distance = n.rank;
                char rank_buf[16];
                std::snprintf(rank_buf, sizeof rank_buf, "r%04zu", n.rank);
                item.item_id = target_qid + "/" + rank_buf + "/" + std::to_string(j);
                ds.items.push_back(std::move(item));
            }
        }
        ds.targets.push_back(t.record);
    }
    ds.recompute_stats();

    auto& c = ds.config;
    c["n_retrieve"] = config.n_retrieve;
    c["rank_step"] = config.rank_step;
    c["k"] = config.k;
    c["max_facts"] = config.max_facts;
    c["seed"] = rng_seed;
    c["min_resolve_similarity"] = config.min_resolve_similarity;
    c["embedder"] = config.embedder.fingerprint_text();
    c["index_fingerprint"] = hex64(index.fingerprint());
    c["generator_model"] = client.model_name();
    c["prompt_hashes"] = {{"topic_v1", prompt_template("topic_v1").hash},
                          {"facts_v1", prompt_template("facts_v1").hash},
                          {"mcq_v1", prompt_template("mcq_v1").hash}};
    c["refusal_patterns"] = config.refusal_patterns;

    spdlog::info("dataset {}: {} targets, {} topics, {} questions, {} skips", ds.dataset_id,
                 ds.targets.size(), ds.stats.topics, ds.stats.questions, ds.skips.size());
    return ds;
}

}  // namespace ripple
