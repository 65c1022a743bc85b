#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace ckg::unicode {

/// Decodes UTF-8. Throws Error(ParseError) on malformed input.
std::u32string decode(std::string_view utf8);

std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

/// Number of scalar values in a UTF-8 string.
std::size_t length(std::string_view utf8);

bool is_valid(std::string_view utf8);

bool is_whitespace(char32_t cp);
bool is_control(char32_t cp);
bool is_alnum(char32_t cp);
bool is_han(char32_t cp);
bool is_latin_letter(char32_t cp);

/// Simple (one-to-one) Unicode case folding of a single scalar value.
char32_t fold(char32_t cp);

}  // namespace ckg::unicode
