#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ripple::text {

/// Splits on '.', '!' or '?' followed by whitespace. Terminators stay with
/// their sentence; fragments are trimmed and empty ones dropped.
std::vector<std::string> split_sentences(std::string_view body);

bool is_stopword(std::string_view lowercase_token);

/// Lowercased tokens of length >= 3 that are not stopwords.
std::set<std::string> content_words(std::string_view s);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Case-insensitive substring search.
bool contains_icase(std::string_view haystack, std::string_view needle);

/// A word in its original spelling plus its byte offset in the source string.
struct Word {
    std::string text;
    std::size_t offset = 0;
};
std::vector<Word> words(std::string_view s);

}  // namespace ripple::text
