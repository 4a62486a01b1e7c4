#include "ripple/chat.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <vector>

#include <nlohmann/json.hpp>

#include "ripple/error.hpp"
#include "ripple/hash.hpp"
#include "ripple/text.hpp"

namespace ripple {
namespace {

struct RawPrompt {
    const char* name;
    const char* text;
};

constexpr RawPrompt kRawPrompts[] = {
#include "ripple_prompts.inc"
};

bool is_upper_start(std::string_view w) {
    return !w.empty() && std::isupper(static_cast<unsigned char>(w.front()));
}

}  // namespace

std::string PromptTemplate::render(const std::map<std::string, std::string>& vars) const {
    std::string out;
    out.reserve(text.size() + 256);
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t open = text.find("{{", i);
        if (open == std::string::npos) {
            out.append(text, i);
            break;
        }
        std::size_t close = text.find("}}", open + 2);
        if (close == std::string::npos) {
            out.append(text, i);
            break;
        }
        out.append(text, i, open - i);
        auto it = vars.find(text.substr(open + 2, close - open - 2));
        if (it != vars.end()) out += it->second;
        i = close + 2;
    }
    return out;
}

const PromptTemplate& prompt_template(std::string_view name) {
    static const std::vector<PromptTemplate> templates = [] {
        std::vector<PromptTemplate> v;
        for (const auto& raw : kRawPrompts)
            v.push_back({raw.name, raw.text, hex64(fnv1a64(raw.text))});
        return v;
    }();
    for (const auto& t : templates)
        if (t.name == name) return t;
    throw NotFoundError("prompt template " + std::string(name));
}

// --- stub -------------------------------------------------------------------

void StubChatClient::add_canned(const std::string& task, const std::string& key, std::string reply) {
    canned_[task][key] = std::move(reply);
}

StubChatClient StubChatClient::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("stub config: ") + e.what(), e.byte);
    }
    StubChatClient stub;
    for (auto& [task_name, entries] : j.items()) {
        if (!entries.is_object()) throw ArgumentError("stub config: '" + task_name + "' must map keys to replies");
        for (auto& [key, reply] : entries.items())
            stub.add_canned(task_name, key, reply.is_string() ? reply.get<std::string>() : reply.dump());
    }
    return stub;
}

std::string StubChatClient::complete(const ChatRequest& request) const {
    auto get = [&](const char* k) -> std::string {
        auto it = request.vars.find(k);
        return it == request.vars.end() ? std::string() : it->second;
    };
    if (auto t = canned_.find(request.task); t != canned_.end()) {
        if (auto r = t->second.find(get("key")); r != t->second.end()) return r->second;
    }
    if (request.task == task::topic) return stub_rules::topic_for(get("question"));
    if (request.task == task::facts)
        return stub_rules::facts_for(get("body"), std::stoul(get("max_facts").empty() ? "10" : get("max_facts")));
    if (request.task == task::mcq)
        return stub_rules::mcq_for(get("topic"), get("facts_json"),
                                   std::stoul(get("fact_index").empty() ? "0" : get("fact_index")));
    return {};
}

namespace stub_rules {

std::string topic_for(std::string_view question) {
    // 1. a quoted span
    for (auto [open, close] : {std::pair<std::string_view, std::string_view>{"\"", "\""},
                               {"\xE2\x80\x9C", "\xE2\x80\x9D"}}) {
        auto a = question.find(open);
        if (a == std::string_view::npos) continue;
        auto b = question.find(close, a + open.size());
        if (b == std::string_view::npos) continue;
        std::string span = text::trim(question.substr(a + open.size(), b - a - open.size()));
        if (!span.empty()) return span;
    }
    // 2. the longest run of capitalized words, skipping the sentence-initial word
    auto ws = text::words(question);
    std::string best;
    std::size_t best_len = 0;
    for (std::size_t i = 1; i < ws.size();) {
        if (!is_upper_start(ws[i].text)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < ws.size() && is_upper_start(ws[j].text)) ++j;
        if (j - i > best_len) {
            best_len = j - i;
            std::size_t from = ws[i].offset;
            std::size_t to = ws[j - 1].offset + ws[j - 1].text.size();
            best = std::string(question.substr(from, to - from));
        }
        i = j;
    }
    if (!best.empty()) return best;
    // 3. the first three content words
    std::string out;
    int taken = 0;
    for (const auto& w : ws) {
        std::string lw = text::to_lower(w.text);
        if (lw.size() < 3 || text::is_stopword(lw)) continue;
        if (!out.empty()) out += ' ';
        out += lw;
        if (++taken == 3) break;
    }
    return out;
}

std::string facts_for(std::string_view body, std::size_t max_facts) {
    nlohmann::json arr = nlohmann::json::array();
    for (auto& s : text::split_sentences(body)) {
        if (arr.size() >= max_facts) break;
        if (s.size() <= 300) arr.push_back(std::move(s));
    }
    return arr.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

// Cloze item: the longest content word of the chosen fact is blanked out and
// offered alongside three words drawn from the other facts.
std::string mcq_for(std::string_view topic, std::string_view facts_json, std::size_t fact_index) {
    std::vector<std::string> facts;
    try {
        facts = nlohmann::json::parse(facts_json).get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
        return "{}";
    }
    if (facts.empty()) return "{}";
    const std::string& fact = facts[fact_index % facts.size()];
    const auto topic_words = text::content_words(topic);

    auto eligible = [&](const text::Word& w) {
        std::string lw = text::to_lower(w.text);
        return lw.size() >= 4 && !text::is_stopword(lw) && !topic_words.count(lw);
    };

    const text::Word* answer = nullptr;
    auto fact_words = text::words(fact);
    for (const auto& w : fact_words)
        if (eligible(w) && (!answer || w.text.size() > answer->text.size())) answer = &w;
    if (!answer) {
        for (const auto& w : fact_words)
            if (!answer || w.text.size() > answer->text.size()) answer = &w;
    }
    if (!answer) return "{}";

    const std::string answer_lc = text::to_lower(answer->text);
    std::vector<std::string> pool;
    for (std::size_t k = 1; k <= facts.size(); ++k) {
        const auto& other = facts[(fact_index + k) % facts.size()];
        for (const auto& w : text::words(other)) {
            std::string lw = text::to_lower(w.text);
            if (!eligible(w) || lw == answer_lc) continue;
            if (std::none_of(pool.begin(), pool.end(),
                             [&](const std::string& p) { return text::to_lower(p) == lw; }))
                pool.push_back(w.text);
        }
    }
    const std::size_t target_len = answer->text.size();
    std::stable_sort(pool.begin(), pool.end(), [&](const std::string& a, const std::string& b) {
        auto da = a.size() > target_len ? a.size() - target_len : target_len - a.size();
        auto db = b.size() > target_len ? b.size() - target_len : target_len - b.size();
        return da < db;
    });
    for (const char* filler : {"unknown", "neither", "unrelated", "undetermined"}) {
        if (pool.size() >= 3) break;
        if (answer_lc != filler) pool.push_back(filler);
    }

    std::string blanked = fact;
    blanked.replace(answer->offset, answer->text.size(), "_____");

    nlohmann::ordered_json item;
    item["question"] = "Regarding " + std::string(topic) + ": which word completes the statement \"" +
                       blanked + "\"?";
    item["choices"] = {answer->text, pool[0], pool[1], pool[2]};
    item["answer"] = 0;
    return item.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace stub_rules

// --- remote -----------------------------------------------------------------

RemoteChatClient::RemoteChatClient(std::string url, std::string model, RetryPolicy retry)
    : url_(std::move(url)), model_(std::move(model)), api_key_(env_or_empty(kChatApiKeyEnv)),
      retry_(retry) {
    if (url_.empty()) throw ArgumentError("remote chat client needs a URL (" + std::string(kChatUrlEnv) + ")");
}

RemoteChatClient RemoteChatClient::from_env(std::string model, RetryPolicy retry) {
    return RemoteChatClient(env_or_empty(kChatUrlEnv), std::move(model), retry);
}

std::string RemoteChatClient::complete(const ChatRequest& request) const {
    nlohmann::json body;
    body["model"] = model_;
    body["temperature"] = 0;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
    nlohmann::json reply = post_json(url_, body, api_key_, retry_);
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("chat reply missing choices[0].message.content: ") + e.what());
    }
}

}  // namespace ripple
