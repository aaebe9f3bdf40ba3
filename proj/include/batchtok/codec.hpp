#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "batchtok/model.hpp"

namespace batchtok {

// What to do with byte sequences that are not valid UTF-8 after token
// bytes are concatenated (token boundaries can split multibyte characters).
enum class Utf8Policy { Replace, Strict };

// Encodes one pretokenized chunk. A chunk that exactly matches a stop-table
// entry becomes that single stop token; otherwise the chunk starts as byte
// tokens and the lowest-ranked mergeable pair is merged until none remains.
std::vector<TokenId> encode_chunk(std::string_view chunk, const TokenizerModel& model);

std::vector<TokenId> encode(std::string_view text, const TokenizerModel& model);

// Concatenates each token's byte string, then applies the UTF-8 policy.
// Throws DecodeError for unknown token ids (naming the offending position)
// and, under Strict, for invalid UTF-8.
std::string decode(const std::vector<TokenId>& tokens, const TokenizerModel& model,
                   Utf8Policy policy = Utf8Policy::Replace);

std::uint64_t encoded_length(std::string_view text, const TokenizerModel& model);

}  // namespace batchtok
