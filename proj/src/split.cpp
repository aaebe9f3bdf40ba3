#include "batchtok/split.hpp"

#include <regex>
#include <unordered_map>

#include "batchtok/errors.hpp"
#include "batchtok/unicode.hpp"

namespace batchtok {

const SplitPattern& SplitPattern::gpt4() {
    static const SplitPattern p{"gpt4", std::string(kGpt4Source)};
    return p;
}

SplitPattern SplitPattern::custom(std::string name, std::string source) {
    return SplitPattern{std::move(name), std::move(source)};
}

namespace {

// Case fold for the contraction suffixes 's 't 'd 'm 'll 've 're. The only
// non-ASCII fold that can reach them is U+017F (long s).
char32_t fold(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 32;
    if (cp == 0x17F) return U's';
    return cp;
}

bool is_word_punct(char32_t cp) {
    // [^\s\p{L}\p{N}]
    return !is_whitespace(cp) && !is_letter(cp) && !is_number(cp);
}

// Scanner for the gpt4 pattern. Operates on decoded codepoints but emits
// chunks as byte slices of the original text, so splitting is lossless even
// on malformed UTF-8.
class Gpt4Scanner {
public:
    explicit Gpt4Scanner(std::string_view text) : text_(text) {
        cps_.reserve(text.size());
        offsets_.reserve(text.size() + 1);
        std::size_t pos = 0;
        while (pos < text.size()) {
            offsets_.push_back(pos);
            cps_.push_back(decode_utf8(text, pos));
        }
        offsets_.push_back(text.size());
    }

    std::vector<std::string> run() {
        std::vector<std::string> chunks;
        std::size_t i = 0;
        while (i < cps_.size()) {
            std::size_t end = match_at(i);
            if (end <= i) end = i + 1;  // unreachable; keeps the partition total
            chunks.emplace_back(text_.substr(offsets_[i], offsets_[end] - offsets_[i]));
            i = end;
        }
        return chunks;
    }

private:
    char32_t at(std::size_t i) const { return cps_[i]; }
    std::size_t size() const { return cps_.size(); }

    // Returns the end index of the first alternative matching at i, or i if
    // none does. Alternatives are tried in pattern order.
    std::size_t match_at(std::size_t i) {
        const std::size_t n = size();

        // '(?i:[sdmt]|ll|ve|re)
        if (at(i) == U'\'' && i + 1 < n) {
            const char32_t c1 = fold(at(i + 1));
            if (c1 == U's' || c1 == U'd' || c1 == U'm' || c1 == U't') return i + 2;
            if (i + 2 < n) {
                const char32_t c2 = fold(at(i + 2));
                if ((c1 == U'l' && c2 == U'l') || (c1 == U'v' && c2 == U'e') ||
                    (c1 == U'r' && c2 == U'e')) {
                    return i + 3;
                }
            }
        }

        // [^\r\n\p{L}\p{N}]?+\p{L}+   (possessive optional prefix)
        {
            const char32_t c = at(i);
            if (is_letter(c)) {
                std::size_t j = i + 1;
                while (j < n && is_letter(at(j))) ++j;
                return j;
            }
            if (c != U'\r' && c != U'\n' && !is_number(c) && i + 1 < n && is_letter(at(i + 1))) {
                std::size_t j = i + 2;
                while (j < n && is_letter(at(j))) ++j;
                return j;
            }
        }

        // \p{N}{1,3}
        if (is_number(at(i))) {
            std::size_t j = i + 1;
            while (j < n && j < i + 3 && is_number(at(j))) ++j;
            return j;
        }

        //  ?[^\s\p{L}\p{N}]++[\r\n]*
        {
            std::size_t j = i + (at(i) == U' ' ? 1 : 0);
            if (j < n && is_word_punct(at(j))) {
                ++j;
                while (j < n && is_word_punct(at(j))) ++j;
                while (j < n && (at(j) == U'\r' || at(j) == U'\n')) ++j;
                return j;
            }
        }

        if (is_whitespace(at(i))) {
            std::size_t run_end = i + 1;
            std::size_t last_newline = (at(i) == U'\r' || at(i) == U'\n') ? i + 1 : 0;
            while (run_end < n && is_whitespace(at(run_end))) {
                if (at(run_end) == U'\r' || at(run_end) == U'\n') last_newline = run_end + 1;
                ++run_end;
            }
            // \s*[\r\n] : up to and including the last newline in the run
            if (last_newline) return last_newline;
            // \s+(?!\S) : the whole run at end of text, else all but the
            // final whitespace (which glues onto the next word)
            if (run_end == n) return run_end;
            if (run_end - i >= 2) return run_end - 1;
            // \s+
            return run_end;
        }

        return i;
    }

    std::string_view text_;
    std::vector<char32_t> cps_;
    std::vector<std::size_t> offsets_;
};

std::vector<std::string> split_custom(std::string_view text, const SplitPattern& pattern) {
    thread_local std::unordered_map<std::string, std::regex> cache;
    auto it = cache.find(pattern.source);
    if (it == cache.end()) {
        try {
            it = cache.emplace(pattern.source, std::regex(pattern.source)).first;
        } catch (const std::regex_error& e) {
            throw ConfigError("invalid split pattern \"" + pattern.name + "\": " + e.what());
        }
    }

    std::vector<std::string> chunks;
    const std::string subject(text);
    std::size_t last_end = 0;
    for (auto m = std::sregex_iterator(subject.begin(), subject.end(), it->second);
         m != std::sregex_iterator(); ++m) {
        const std::size_t pos = static_cast<std::size_t>(m->position());
        if (pos > last_end) chunks.push_back(subject.substr(last_end, pos - last_end));
        if (m->length() > 0) chunks.push_back(m->str());
        last_end = pos + static_cast<std::size_t>(m->length());
    }
    if (last_end < subject.size()) chunks.push_back(subject.substr(last_end));
    return chunks;
}

}  // namespace

std::vector<std::string> split_text(std::string_view text, const SplitPattern& pattern) {
    if (text.empty()) return {};
    if (pattern.name == "gpt4" && (pattern.source.empty() || pattern.source == kGpt4Source)) {
        return Gpt4Scanner(text).run();
    }
    return split_custom(text, pattern);
}

}  // namespace batchtok
