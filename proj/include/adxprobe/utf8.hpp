#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace adxprobe::utf8 {

// Decodes UTF-8; invalid bytes decode to U+FFFD and consume one byte.
std::vector<char32_t> decode(std::string_view text);

std::string encode(char32_t cp);
std::string encode(const std::u32string& cps);

bool is_cjk(char32_t cp);
bool is_latin_letter(char32_t cp);
bool is_digit(char32_t cp);

// Letters considered by language filtering: CJK plus alphabetic scripts.
bool is_letter(char32_t cp);

inline bool is_word_char(char32_t cp) { return is_latin_letter(cp) || is_digit(cp); }

char32_t to_lower(char32_t cp);

} // namespace adxprobe::utf8
