#include "batchtok/unicode.hpp"

#include <algorithm>

namespace batchtok {

namespace {

bool in_ranges(const detail::CodepointRange* ranges, std::size_t n, char32_t cp) {
    const auto* end = ranges + n;
    const auto* it = std::upper_bound(ranges, end, cp, [](char32_t v, const detail::CodepointRange& r) {
        return v < r.first;
    });
    return it != ranges && cp <= (it - 1)->last;
}

}  // namespace

bool is_letter(char32_t cp) {
    return in_ranges(detail::kLetterRanges, detail::kLetterRanges_size, cp);
}

bool is_number(char32_t cp) {
    return in_ranges(detail::kNumberRanges, detail::kNumberRanges_size, cp);
}

bool is_whitespace(char32_t cp) {
    return in_ranges(detail::kWhitespaceRanges, detail::kWhitespaceRanges_size, cp);
}

char32_t decode_utf8(std::string_view text, std::size_t& pos) {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    const unsigned char b0 = byte(pos);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min_cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
        min_cp = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
        min_cp = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
        min_cp = 0x10000;
    } else {
        ++pos;
        return kReplacementChar;
    }
    if (pos + len > text.size()) {
        ++pos;
        return kReplacementChar;
    }
    for (std::size_t i = 1; i < len; ++i) {
        const unsigned char b = byte(pos + i);
        if ((b & 0xC0) != 0x80) {
            ++pos;
            return kReplacementChar;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // overlong, surrogate and out-of-range encodings are malformed
    if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++pos;
        return kReplacementChar;
    }
    pos += len;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_valid_utf8(std::string_view bytes) {
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        const std::size_t start = pos;
        const char32_t cp = decode_utf8(bytes, pos);
        if (cp == kReplacementChar) {
            // distinguish a literal U+FFFD from a decode failure
            if (pos - start != 3 || bytes.substr(start, 3) != "\xEF\xBF\xBD") {
                return false;
            }
        }
    }
    return true;
}

std::string utf8_replace_invalid(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        const std::size_t start = pos;
        const char32_t cp = decode_utf8(bytes, pos);
        if (cp == kReplacementChar) {
            out += "\xEF\xBF\xBD";
        } else {
            out.append(bytes.substr(start, pos - start));
        }
    }
    return out;
}

}  // namespace batchtok
