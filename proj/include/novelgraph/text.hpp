#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small UTF-8 aware helpers shared by the text-processing modules.
namespace novelgraph::text {

struct Token {
    std::size_t begin = 0;  // byte offset into the tokenized string
    std::size_t end = 0;
    bool is_word = false;   // false for punctuation tokens

    std::string_view view(std::string_view source) const { return source.substr(begin, end - begin); }
};

// Decodes one code point starting at `pos`, advancing `pos`. Invalid bytes
// decode as U+FFFD and consume a single byte.
char32_t next_code_point(std::string_view s, std::size_t& pos);

std::size_t code_point_length(std::string_view s);
std::u32string to_u32(std::string_view s);

bool is_word_char(char32_t c);
bool is_upper(char32_t c);
bool is_space(char32_t c);
bool is_quote(char32_t c);

// Word tokens are runs of letters and digits with internal apostrophes or
// hyphens; a trailing possessive 's is split into its own token, and a single
// capital followed by '.' stays one token ("H."). Every other non-space code
// point is a one-character punctuation token.
std::vector<Token> tokenize(std::string_view s);

// Convenience: just the word token strings.
std::vector<std::string> words(std::string_view s);

bool is_capitalized(std::string_view word);
std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);

// True for tokens of the form CHAR<digits>.
bool is_character_id(std::string_view token);

// Orders CHAR ids by numeric suffix (CHAR2 < CHAR10); other strings compare
// lexicographically after all ids.
bool character_id_less(std::string_view a, std::string_view b);

// 64-bit FNV-1a; stable across platforms, used for cache keys and feature hashing.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace novelgraph::text
