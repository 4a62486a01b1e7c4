#include "ripple/corpus.hpp"

#include <array>
#include <cctype>
#include <string>
#include <string_view>

namespace ripple {
namespace {

bool starts_with_icase(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > s.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[pos + i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

std::size_t find_icase(std::string_view s, std::size_t from, std::string_view needle) {
    for (std::size_t i = from; i + needle.size() <= s.size(); ++i)
        if (starts_with_icase(s, i, needle)) return i;
    return std::string_view::npos;
}

std::string drop_comments(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        std::size_t open = in.find("<!--", i);
        if (open == std::string_view::npos) {
            out.append(in.substr(i));
            break;
        }
        out.append(in.substr(i, open - i));
        std::size_t close = in.find("-->", open + 4);
        if (close == std::string_view::npos) break;
        i = close + 3;
    }
    return out;
}

bool ref_tag_at(std::string_view s, std::size_t pos) {
    if (!starts_with_icase(s, pos, "<ref")) return false;
    if (pos + 4 >= s.size()) return true;
    char c = s[pos + 4];
    return c == '>' || c == '/' || std::isspace(static_cast<unsigned char>(c));
}

// <ref>..</ref> and <ref .../> go away with their content.
std::string drop_refs(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        if (in[i] == '<' && ref_tag_at(in, i)) {
            std::size_t gt = in.find('>', i);
            if (gt == std::string_view::npos) break;
            if (in[gt - 1] == '/') {
                i = gt + 1;
                continue;
            }
            std::size_t close = find_icase(in, gt + 1, "</ref");
            if (close == std::string_view::npos) {
                i = gt + 1;
                continue;
            }
            std::size_t close_gt = in.find('>', close);
            i = close_gt == std::string_view::npos ? in.size() : close_gt + 1;
            continue;
        }
        out.push_back(in[i++]);
    }
    return out;
}

// Removes balanced `open ... close` spans with a nesting counter; an
// unterminated span swallows the rest of the input. Stray closers are dropped.
std::string drop_nested(std::string_view in, std::string_view open, std::string_view close) {
    std::string out;
    out.reserve(in.size());
    int depth = 0;
    std::size_t i = 0;
    while (i < in.size()) {
        if (in.compare(i, open.size(), open) == 0) {
            ++depth;
            i += open.size();
        } else if (in.compare(i, close.size(), close) == 0) {
            if (depth > 0) --depth;
            i += close.size();
        } else {
            if (depth == 0) out.push_back(in[i]);
            ++i;
        }
    }
    return out;
}

constexpr std::array<std::string_view, 5> kDroppedLinkNamespaces = {
    "file:", "image:", "category:", "media:", "wikt:"};

std::string strip_pass(std::string_view in);

// Renders the body of a [[...]] link (without the brackets).
std::string render_link(std::string_view inner) {
    std::string_view target = inner;
    std::string_view display;
    bool has_display = false;
    int depth = 0;
    std::size_t last_pipe = std::string_view::npos;
    std::size_t first_pipe = std::string_view::npos;
    for (std::size_t i = 0; i < inner.size(); ++i) {
        if (inner.compare(i, 2, "[[") == 0) {
            ++depth;
            ++i;
        } else if (inner.compare(i, 2, "]]") == 0) {
            --depth;
            ++i;
        } else if (inner[i] == '|' && depth == 0) {
            if (first_pipe == std::string_view::npos) first_pipe = i;
            last_pipe = i;
        }
    }
    if (first_pipe != std::string_view::npos) {
        target = inner.substr(0, first_pipe);
        display = inner.substr(last_pipe + 1);
        has_display = true;
    }
    std::size_t t = 0;
    while (t < target.size() && (target[t] == ' ' || target[t] == ':')) ++t;
    for (auto ns : kDroppedLinkNamespaces)
        if (starts_with_icase(target, t, ns) && !(t > 0 && target[t - 1] == ':')) return {};
    if (has_display) return strip_pass(display);
    return strip_pass(target.substr(t));
}

std::string render_links(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        if (in.compare(i, 2, "[[") == 0) {
            int depth = 1;
            std::size_t j = i + 2;
            while (j < in.size() && depth > 0) {
                if (in.compare(j, 2, "[[") == 0) {
                    ++depth;
                    j += 2;
                } else if (in.compare(j, 2, "]]") == 0) {
                    --depth;
                    j += 2;
                } else {
                    ++j;
                }
            }
            if (depth != 0) {  // unmatched opener: keep the text, lose the brackets
                i += 2;
                continue;
            }
            out += render_link(in.substr(i + 2, j - i - 4));
            i = j;
        } else if (in.compare(i, 2, "]]") == 0) {
            i += 2;
        } else {
            out.push_back(in[i++]);
        }
    }
    return out;
}

bool external_link_at(std::string_view s, std::size_t pos) {
    return s[pos] == '[' && (starts_with_icase(s, pos + 1, "http://") ||
                             starts_with_icase(s, pos + 1, "https://") ||
                             s.compare(pos + 1, 2, "//") == 0);
}

std::string render_external_links(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        if (external_link_at(in, i)) {
            std::size_t close = in.find(']', i);
            if (close == std::string_view::npos) {
                ++i;
                continue;
            }
            std::string_view body = in.substr(i + 1, close - i - 1);
            std::size_t space = body.find(' ');
            if (space != std::string_view::npos) out.append(body.substr(space + 1));
            i = close + 1;
        } else {
            out.push_back(in[i++]);
        }
    }
    return out;
}

std::string drop_html_tags(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        if (in[i] == '<' && i + 1 < in.size() &&
            (std::isalpha(static_cast<unsigned char>(in[i + 1])) || in[i + 1] == '/' ||
             in[i + 1] == '!')) {
            std::size_t gt = in.find('>', i);
            i = gt == std::string_view::npos ? i + 1 : gt + 1;
            continue;
        }
        out.push_back(in[i++]);
    }
    return out;
}

// '' and ''' emphasis runs, == heading == runs, &nbsp;.
std::string drop_inline_marks(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        char c = in[i];
        if (c == '\'' || c == '=') {
            std::size_t j = i;
            while (j < in.size() && in[j] == c) ++j;
            if (j - i >= 2) {
                if (c == '=') out.push_back(' ');
            } else {
                out.push_back(c);
            }
            i = j;
        } else if (in.compare(i, 6, "&nbsp;") == 0) {
            out.push_back(' ');
            i += 6;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

std::string collapse_whitespace(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    bool pending_space = false;
    for (char c : in) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::string strip_pass(std::string_view in) {
    std::string s = drop_comments(in);
    s = drop_refs(s);
    s = drop_nested(s, "{{", "}}");
    s = drop_nested(s, "{|", "|}");
    s = render_links(s);
    s = render_external_links(s);
    s = drop_html_tags(s);
    s = drop_inline_marks(s);
    return collapse_whitespace(s);
}

}  // namespace

std::string strip_wikitext(std::string_view wikitext) {
    // A pass either shrinks its input or only rewrites whitespace, so this terminates.
    std::string current = strip_pass(wikitext);
    for (;;) {
        std::string next = strip_pass(current);
        if (next == current) return current;
        current = std::move(next);
    }
}

bool is_redirect_text(std::string_view wikitext) {
    std::size_t i = 0;
    while (i < wikitext.size() && std::isspace(static_cast<unsigned char>(wikitext[i]))) ++i;
    return starts_with_icase(wikitext, i, "#redirect");
}

bool is_disambiguation_title(std::string_view title) {
    return find_icase(title, 0, "(disambiguation)") != std::string_view::npos;
}

}  // namespace ripple
