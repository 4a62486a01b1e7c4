#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "ripple/http.hpp"

namespace ripple {

/// A versioned prompt template compiled in from prompts/<name>.txt.
struct PromptTemplate {
    std::string name;  // e.g. "mcq_v1"
    std::string text;
    std::string hash;  // fnv1a64 of text, hex

    /// Replaces every {{var}} with vars[var]; unknown placeholders become empty.
    std::string render(const std::map<std::string, std::string>& vars) const;
};

const PromptTemplate& prompt_template(std::string_view name);

namespace task {
inline constexpr const char* topic = "topic";
inline constexpr const char* facts = "facts";
inline constexpr const char* mcq = "mcq";
inline constexpr const char* answer = "answer";
}  // namespace task

/// One chat turn. Remote clients send `prompt`; the stub reads `task`/`vars`.
struct ChatRequest {
    std::string task;
    std::string prompt;
    std::map<std::string, std::string> vars;
};

/// Implementations must be safe to call concurrently.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ChatRequest& request) const = 0;
    virtual std::string model_name() const = 0;
};

/// Deterministic offline client: canned replies keyed by (task, vars["key"]),
/// falling back to rule-based answers that only read the request vars.
class StubChatClient final : public ChatClient {
public:
    StubChatClient() = default;

    void add_canned(const std::string& task, const std::string& key, std::string reply);
    /// {"topic": {"<question>": "<reply>"}, "facts": {...}, "mcq": {...}}
    static StubChatClient from_json_file(const std::filesystem::path& path);

    std::string complete(const ChatRequest& request) const override;
    std::string model_name() const override { return "stub-v1"; }

private:
    std::map<std::string, std::map<std::string, std::string>> canned_;
};

inline constexpr const char* kChatApiKeyEnv = "RIPPLE_CHAT_API_KEY";
inline constexpr const char* kChatUrlEnv = "RIPPLE_CHAT_URL";

/// Chat-completions style endpoint: {"model", "messages": [...]} ->
/// choices[0].message.content.
class RemoteChatClient final : public ChatClient {
public:
    RemoteChatClient(std::string url, std::string model, RetryPolicy retry = {});
    /// URL from RIPPLE_CHAT_URL, key from RIPPLE_CHAT_API_KEY.
    static RemoteChatClient from_env(std::string model, RetryPolicy retry = {});

    std::string complete(const ChatRequest& request) const override;
    std::string model_name() const override { return model_; }

private:
    std::string url_;
    std::string model_;
    std::string api_key_;
    RetryPolicy retry_;
};

namespace stub_rules {
std::string topic_for(std::string_view question);
std::string facts_for(std::string_view body, std::size_t max_facts);
std::string mcq_for(std::string_view topic, std::string_view facts_json, std::size_t fact_index);
}  // namespace stub_rules

}  // namespace ripple
