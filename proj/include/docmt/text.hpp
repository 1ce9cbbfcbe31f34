#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by every module. All strings in the toolkit are UTF-8.
namespace docmt::text {

std::string nfc(std::string_view s);
std::string casefold(std::string_view s);
bool is_valid_utf8(std::string_view s);

// Code points of a UTF-8 string; invalid sequences map to U+FFFD.
std::u32string to_u32(std::string_view s);
std::string to_utf8(std::u32string_view s);

bool is_space(char32_t c);
bool is_punct(char32_t c);
bool is_alpha(char32_t c);
bool is_digit(char32_t c);
// Han, Hiragana and Katakana: scripts written without word spacing.
bool is_cjk(char32_t c);

// Maximal runs of non-whitespace.
std::vector<std::string> split_whitespace(std::string_view s);
std::size_t count_words(std::string_view s);

// Trim and squeeze every whitespace run to one ASCII space.
std::string collapse_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> split(std::string_view s, char sep);

std::size_t length_u32(std::string_view s);

}  // namespace docmt::text
