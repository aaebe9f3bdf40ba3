#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "batchtok/split.hpp"

namespace batchtok {

using TokenId = std::uint32_t;
using TokenPair = std::pair<TokenId, TokenId>;

inline constexpr TokenId kBaseVocabSize = 256;

struct MergeEntry {
    TokenPair pair;
    TokenId new_token = 0;

    bool operator==(const MergeEntry&) const = default;
};

// Ordered merge list; a merge's position is its rank (lower = earlier =
// higher priority at encode time). New token ids are contiguous and start
// right after the base bytes and stop tokens.
struct MergeTable {
    std::vector<MergeEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool operator==(const MergeTable&) const = default;
};

// Everything needed to encode and decode: the split pattern, the stop-token
// table and the ordered merges. The byte-string vocabulary and the rank
// index are derived on construction.
class TokenizerModel {
public:
    TokenizerModel() = default;

    // Validates the merge table (constituents defined earlier, never stop
    // tokens; new ids contiguous) and builds the derived tables. Throws
    // ConfigError on an invariant breach.
    TokenizerModel(SplitPattern pattern, std::vector<std::string> stop_chunks, MergeTable merges);

    const SplitPattern& split_pattern() const { return split_pattern_; }
    const std::vector<std::string>& stop_chunks() const { return stop_chunks_; }
    const MergeTable& merges() const { return merge_table_; }

    TokenId vocab_size() const { return static_cast<TokenId>(vocab_.size()); }
    TokenId merge_base() const { return kBaseVocabSize + static_cast<TokenId>(stop_chunks_.size()); }

    // Byte string for any defined token id (base byte, stop token or merge).
    const std::string& token_bytes(TokenId id) const { return vocab_[id]; }
    bool defined(TokenId id) const { return id < vocab_.size(); }

    // Stop-token id for a chunk that exactly matches a stop entry.
    const TokenId* stop_token(std::string_view chunk) const;

    // Merge rank for an adjacent pair, or nullptr if the pair never merges.
    const std::uint32_t* merge_rank(TokenId first, TokenId last) const;

    bool operator==(const TokenizerModel& other) const {
        return split_pattern_ == other.split_pattern_ && stop_chunks_ == other.stop_chunks_ &&
               merge_table_ == other.merge_table_;
    }

private:
    SplitPattern split_pattern_ = SplitPattern::gpt4();
    std::vector<std::string> stop_chunks_;
    MergeTable merge_table_;

    std::vector<std::string> vocab_;
    std::unordered_map<std::string, TokenId> stop_lookup_;
    std::unordered_map<std::uint64_t, std::uint32_t> rank_lookup_;
};

}  // namespace batchtok
