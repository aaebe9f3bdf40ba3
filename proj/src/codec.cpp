#include "batchtok/codec.hpp"

#include <limits>

#include "batchtok/errors.hpp"
#include "batchtok/unicode.hpp"

namespace batchtok {

std::vector<TokenId> encode_chunk(std::string_view chunk, const TokenizerModel& model) {
    if (const TokenId* stop = model.stop_token(chunk)) {
        return {*stop};
    }

    std::vector<TokenId> ids;
    ids.reserve(chunk.size());
    for (unsigned char b : chunk) ids.push_back(b);

    while (ids.size() >= 2) {
        std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
        TokenPair best_pair{};
        for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
            if (const std::uint32_t* rank = model.merge_rank(ids[i], ids[i + 1])) {
                if (*rank < best_rank) {
                    best_rank = *rank;
                    best_pair = {ids[i], ids[i + 1]};
                }
            }
        }
        if (best_rank == std::numeric_limits<std::uint32_t>::max()) break;

        const TokenId new_token = model.merges().entries[best_rank].new_token;
        std::size_t w = 0;
        std::size_t r = 0;
        while (r < ids.size()) {
            if (r + 1 < ids.size() && ids[r] == best_pair.first && ids[r + 1] == best_pair.second) {
                ids[w++] = new_token;
                r += 2;
            } else {
                ids[w++] = ids[r++];
            }
        }
        ids.resize(w);
    }
    return ids;
}

std::vector<TokenId> encode(std::string_view text, const TokenizerModel& model) {
    std::vector<TokenId> out;
    for (const auto& chunk : split_text(text, model.split_pattern())) {
        const auto ids = encode_chunk(chunk, model);
        out.insert(out.end(), ids.begin(), ids.end());
    }
    return out;
}

std::string decode(const std::vector<TokenId>& tokens, const TokenizerModel& model, Utf8Policy policy) {
    std::string bytes;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!model.defined(tokens[i])) {
            throw DecodeError("unknown token id " + std::to_string(tokens[i]) + " at position " +
                              std::to_string(i));
        }
        bytes += model.token_bytes(tokens[i]);
    }
    if (policy == Utf8Policy::Strict) {
        if (!is_valid_utf8(bytes)) {
            throw DecodeError("decoded bytes are not valid UTF-8");
        }
        return bytes;
    }
    return utf8_replace_invalid(bytes);
}

std::uint64_t encoded_length(std::string_view text, const TokenizerModel& model) {
    return encode(text, model).size();
}

}  // namespace batchtok
