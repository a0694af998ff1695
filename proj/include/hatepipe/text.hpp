#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hatepipe::text {

// Decodes one code point starting at `pos` and advances `pos`. Invalid or
// truncated sequences decode to U+FFFD and consume a single byte.
char32_t decode_next(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

std::u32string to_u32(std::string_view s);
std::string to_utf8(std::u32string_view s);

// ASCII whitespace plus the Unicode space characters the normalizer folds to
// U+0020. Tokenizers throughout the library split on exactly this set.
bool is_space(char32_t cp);

bool is_ascii_space(char c);

// Splits on is_space(), dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Simple one-to-one lowercase mapping for Latin (including fullwidth), Greek
// and Cyrillic letters.
// The map is closed: lower(lower(c)) == lower(c).
char32_t to_lower(char32_t cp);

std::string to_lower_ascii(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

// Strips leading and trailing ASCII punctuation.
std::string_view strip_punct(std::string_view s);

std::string trim(std::string_view s);

}  // namespace hatepipe::text
