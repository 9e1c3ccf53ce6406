#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mg::text {

// Decodes UTF-8; invalid bytes decode to U+FFFD one byte at a time.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
std::string encode_utf8(char32_t c);
bool valid_utf8(std::string_view s);
size_t codepoint_count(std::string_view s);

// Character classes over the Latin, Greek and Cyrillic blocks plus general
// punctuation; everything outside these blocks that is not whitespace is
// treated as a letter-like symbol.
bool is_space(char32_t c);
bool is_letter(char32_t c);
bool is_digit(char32_t c);
bool is_punct(char32_t c);
char32_t to_lower(char32_t c);
char32_t to_upper(char32_t c);

std::string lowercase(std::string_view s);
bool has_letter(std::string_view s);
// Uppercases the first letter in `s`.
std::string capitalize_first_letter(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);
std::string normalize_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace mg::text
