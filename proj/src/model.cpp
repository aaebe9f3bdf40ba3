#include "batchtok/model.hpp"

#include "batchtok/errors.hpp"

namespace batchtok {

namespace {

std::uint64_t pack_pair(TokenId first, TokenId last) {
    return (static_cast<std::uint64_t>(first) << 32) | last;
}

}  // namespace

TokenizerModel::TokenizerModel(SplitPattern pattern, std::vector<std::string> stop_chunks, MergeTable merges)
    : split_pattern_(std::move(pattern)),
      stop_chunks_(std::move(stop_chunks)),
      merge_table_(std::move(merges)) {
    vocab_.reserve(kBaseVocabSize + stop_chunks_.size() + merge_table_.size());
    for (unsigned b = 0; b < kBaseVocabSize; ++b) {
        vocab_.emplace_back(1, static_cast<char>(b));
    }

    TokenId next = kBaseVocabSize;
    for (const auto& chunk : stop_chunks_) {
        vocab_.push_back(chunk);
        stop_lookup_.emplace(chunk, next++);
    }

    const TokenId first_merge_id = next;
    for (std::size_t rank = 0; rank < merge_table_.entries.size(); ++rank) {
        const MergeEntry& e = merge_table_.entries[rank];
        if (e.new_token != next) {
            throw ConfigError("merge " + std::to_string(rank) + " has token id " +
                              std::to_string(e.new_token) + ", expected " + std::to_string(next));
        }
        for (TokenId part : {e.pair.first, e.pair.second}) {
            if (part >= next) {
                throw ConfigError("merge " + std::to_string(rank) + " references undefined token " +
                                  std::to_string(part));
            }
            if (part >= kBaseVocabSize && part < first_merge_id) {
                throw ConfigError("merge " + std::to_string(rank) + " references stop token " +
                                  std::to_string(part));
            }
        }
        vocab_.push_back(vocab_[e.pair.first] + vocab_[e.pair.second]);
        rank_lookup_.emplace(pack_pair(e.pair.first, e.pair.second), static_cast<std::uint32_t>(rank));
        ++next;
    }
}

const TokenId* TokenizerModel::stop_token(std::string_view chunk) const {
    auto it = stop_lookup_.find(std::string(chunk));
    return it == stop_lookup_.end() ? nullptr : &it->second;
}

const std::uint32_t* TokenizerModel::merge_rank(TokenId first, TokenId last) const {
    auto it = rank_lookup_.find(pack_pair(first, last));
    return it == rank_lookup_.end() ? nullptr : &it->second;
}

}  // namespace batchtok
