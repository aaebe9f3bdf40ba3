#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace batchtok {

inline constexpr char32_t kReplacementChar = 0xFFFD;

namespace detail {

struct CodepointRange {
    char32_t first;
    char32_t last;
};

extern const CodepointRange kLetterRanges[];
extern const std::size_t kLetterRanges_size;
extern const CodepointRange kNumberRanges[];
extern const std::size_t kNumberRanges_size;
extern const CodepointRange kWhitespaceRanges[];
extern const std::size_t kWhitespaceRanges_size;

}  // namespace detail

// Unicode general category L* / N* and regex \s, matching the reference
// pretokenizer engine codepoint for codepoint.
bool is_letter(char32_t cp);
bool is_number(char32_t cp);
bool is_whitespace(char32_t cp);

// Decodes the codepoint starting at byte offset `pos` and advances `pos`
// past it. Malformed input yields U+FFFD and advances one byte.
char32_t decode_utf8(std::string_view text, std::size_t& pos);

// Appends `cp` to `out` as UTF-8.
void append_utf8(std::string& out, char32_t cp);

bool is_valid_utf8(std::string_view bytes);

// Copies `bytes` replacing every malformed sequence with U+FFFD.
std::string utf8_replace_invalid(std::string_view bytes);

}  // namespace batchtok
