#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace batchtok {

// A pretokenization pattern. `name` identifies the pattern ("gpt4" is the
// built-in default); `source` is the regex source it corresponds to.
// Custom patterns are compiled as ECMAScript regexes; the built-in gpt4
// pattern runs through a dedicated scanner because it needs Unicode
// categories and possessive quantifiers.
struct SplitPattern {
    std::string name;
    std::string source;

    bool operator==(const SplitPattern&) const = default;

    static const SplitPattern& gpt4();
    static SplitPattern custom(std::string name, std::string source);
};

inline constexpr std::string_view kGpt4Source =
    R"('(?i:[sdmt]|ll|ve|re)|[^\r\n\p{L}\p{N}]?+\p{L}+|\p{N}{1,3}| ?[^\s\p{L}\p{N}]++[\r\n]*|\s*[\r\n]|\s+(?!\S)|\s+)";

// Splits `text` into chunks. Concatenating the chunks always reproduces
// `text` byte for byte; custom patterns achieve this by emitting the text
// between matches as chunks of its own.
// Throws ConfigError if a custom pattern source does not compile.
std::vector<std::string> split_text(std::string_view text, const SplitPattern& pattern);

}  // namespace batchtok
