#include "ripple/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "ripple/embedder.hpp"

namespace ripple::text {
namespace {

// Sorted for binary search.
constexpr std::array<std::string_view, 96> kStopwords = {
    "about", "above", "after", "again", "against", "all", "also", "and", "any", "are",
    "because", "been", "before", "being", "below", "between", "both", "but", "can", "could",
    "did", "does", "doing", "down", "during", "each", "few", "for", "from", "further",
    "had", "has", "have", "having", "her", "here", "hers", "him", "his", "how",
    "into", "its", "itself", "just", "may", "more", "most", "not", "now", "off",
    "once", "only", "other", "our", "ours", "out", "over", "own", "same", "she",
    "should", "some", "such", "than", "that", "the", "their", "them", "then", "there",
    "these", "they", "this", "those", "through", "too", "under", "until", "very", "was",
    "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will",
    "with", "would", "you", "your", "yours", "yourself"};

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80 || c == '-'; }

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool contains_icase(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                          });
    return it != haystack.end();
}

std::vector<std::string> split_sentences(std::string_view body) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        bool terminator = c == '.' || c == '!' || c == '?';
        bool at_break = i + 1 == body.size() || std::isspace(static_cast<unsigned char>(body[i + 1]));
        if (terminator && at_break) {
            std::string s = trim(body.substr(start, i + 1 - start));
            if (!s.empty()) out.push_back(std::move(s));
            start = i + 1;
        }
    }
    std::string tail = trim(body.substr(std::min(start, body.size())));
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

bool is_stopword(std::string_view w) {
    return std::binary_search(kStopwords.begin(), kStopwords.end(), w);
}

std::set<std::string> content_words(std::string_view s) {
    std::set<std::string> out;
    for (auto& tok : tokenize(s))
        if (tok.size() >= 3 && !is_stopword(tok)) out.insert(std::move(tok));
    return out;
}

std::vector<Word> words(std::string_view s) {
    std::vector<Word> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && !is_word_char(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t b = i;
        while (i < s.size() && is_word_char(static_cast<unsigned char>(s[i]))) ++i;
        if (i > b) {
            std::string w(s.substr(b, i - b));
            while (!w.empty() && w.back() == '-') w.pop_back();
            if (!w.empty()) out.push_back({std::move(w), b});
        }
    }
    return out;
}

}  // namespace ripple::text
