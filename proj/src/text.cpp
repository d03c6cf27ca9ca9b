#include "novelgraph/text.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace novelgraph::text {

char32_t next_code_point(std::string_view s, std::size_t& pos) {
    const auto lead = static_cast<unsigned char>(s[pos]);
    std::size_t len = 1;
    char32_t cp = lead;
    if (lead >= 0xF0 && lead < 0xF8) {
        len = 4;
        cp = lead & 0x07;
    } else if (lead >= 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if (lead >= 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if (lead >= 0x80) {
        ++pos;
        return 0xFFFD;
    }
    if (pos + len > s.size()) {
        ++pos;
        return 0xFFFD;
    }
    for (std::size_t i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) {
            ++pos;
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    pos += len;
    return cp;
}

std::size_t code_point_length(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < s.size(); ++n) next_code_point(s, pos);
    return n;
}

std::u32string to_u32(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t pos = 0; pos < s.size();) out.push_back(next_code_point(s, pos));
    return out;
}

bool is_word_char(char32_t c) {
    if (c < 0x80) return std::isalnum(static_cast<unsigned char>(c)) != 0;
    return u_isalnum(static_cast<UChar32>(c)) != 0;
}

bool is_upper(char32_t c) {
    if (c < 0x80) return c >= 'A' && c <= 'Z';
    return u_isupper(static_cast<UChar32>(c)) != 0;
}

bool is_space(char32_t c) {
    if (c < 0x80) return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0;
}

bool is_quote(char32_t c) {
    switch (c) {
        case U'"':
        case U'\'':
        case U'“':
        case U'”':
        case U'‘':
        case U'’':
        case U'«':
        case U'»':
            return true;
        default:
            return false;
    }
}

namespace {

bool is_apostrophe(char32_t c) { return c == U'\'' || c == U'’'; }

char32_t peek(std::string_view s, std::size_t pos) {
    if (pos >= s.size()) return 0;
    return next_code_point(s, pos);
}

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> tokens;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const std::size_t start = pos;
        const char32_t c = next_code_point(s, pos);
        if (is_space(c)) continue;
        if (!is_word_char(c)) {
            tokens.push_back({start, pos, false});
            continue;
        }
        std::size_t last_apostrophe = std::string_view::npos;
        std::size_t cps = 1;
        while (pos < s.size()) {
            std::size_t probe = pos;
            const char32_t d = next_code_point(s, probe);
            if (is_word_char(d)) {
                pos = probe;
                ++cps;
                continue;
            }
            if ((is_apostrophe(d) || d == U'-') && is_word_char(peek(s, probe))) {
                if (is_apostrophe(d)) last_apostrophe = pos;
                pos = probe;
                ++cps;
                continue;
            }
            break;
        }
        // Possessive clitic becomes its own token.
        if (last_apostrophe != std::string_view::npos) {
            std::size_t after = last_apostrophe;
            next_code_point(s, after);
            const auto tail = s.substr(after, pos - after);
            if (tail == "s" || tail == "S") {
                tokens.push_back({start, last_apostrophe, true});
                tokens.push_back({last_apostrophe, pos, false});
                continue;
            }
        }
        if (cps == 1 && is_upper(c) && pos < s.size() && s[pos] == '.') ++pos;
        tokens.push_back({start, pos, true});
    }
    return tokens;
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& t : tokenize(s)) {
        if (t.is_word) out.emplace_back(t.view(s));
    }
    return out;
}

bool is_capitalized(std::string_view word) {
    if (word.empty()) return false;
    std::size_t pos = 0;
    return is_upper(next_code_point(word, pos));
}

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t pos = 0; pos < s.size();) {
        const std::size_t start = pos;
        const char32_t c = next_code_point(s, pos);
        if (c < 0x80) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            continue;
        }
        const auto lower = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
        if (lower == c) {
            out.append(s.substr(start, pos - start));
            continue;
        }
        // Re-encode the lowered code point.
        if (lower < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (lower >> 6)));
            out.push_back(static_cast<char>(0x80 | (lower & 0x3F)));
        } else if (lower < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (lower >> 12)));
            out.push_back(static_cast<char>(0x80 | ((lower >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (lower & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (lower >> 18)));
            out.push_back(static_cast<char>(0x80 | ((lower >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((lower >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (lower & 0x3F)));
        }
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto idx = s.find(sep, start);
        if (idx == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, idx - start));
        start = idx + 1;
    }
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        const std::size_t b = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > b) out.emplace_back(s.substr(b, i - b));
    }
    return out;
}

bool is_character_id(std::string_view token) {
    if (token.size() < 5 || token.substr(0, 4) != "CHAR") return false;
    return std::all_of(token.begin() + 4, token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool character_id_less(std::string_view a, std::string_view b) {
    const bool ia = is_character_id(a);
    const bool ib = is_character_id(b);
    if (ia && ib) {
        const auto na = a.substr(4);
        const auto nb = b.substr(4);
        if (na.size() != nb.size()) return na.size() < nb.size();
        return na < nb;
    }
    if (ia != ib) return ia;
    return a < b;
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace novelgraph::text
