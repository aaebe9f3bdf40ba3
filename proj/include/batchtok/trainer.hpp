#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "batchtok/histogram.hpp"
#include "batchtok/model.hpp"
#include "batchtok/split.hpp"

namespace batchtok {

// How identical-token runs are counted. NonOverlapping counts a run of k
// equal tokens as floor(k/2) occurrences of the pair (what a merge pass can
// actually consume); Overcount counts all k-1 adjacencies and enables the
// fused count+merge fast path.
enum class CountingMode { NonOverlapping, Overcount };

inline constexpr std::uint32_t kUnboundedBatch = std::numeric_limits<std::uint32_t>::max();

struct TrainConfig {
    std::uint32_t vocab_size = 0;
    std::uint32_t stop_list_size = 0;
    std::uint64_t freq_cutoff = 1;
    std::uint32_t cap_divisor = 2;
    std::uint32_t max_batch_size = kUnboundedBatch;
    SplitPattern split_pattern = SplitPattern::gpt4();
    CountingMode counting_mode = CountingMode::NonOverlapping;
    // Token-disjoint batching that stops at the first conflict. Kept only
    // for batch-size comparisons; position-sensitive selection is the
    // default.
    bool naive_batching = false;

    std::uint32_t merge_budget() const { return vocab_size - kBaseVocabSize - stop_list_size; }

    // Throws ConfigError if the parameters are inconsistent.
    void validate() const;
};

// Sequences of token ids with the frequency of the chunk they came from.
// Frequencies never change during training; sequences only shrink.
struct TokenSequenceSet {
    struct Item {
        std::vector<TokenId> tokens;
        std::uint64_t freq = 1;
    };

    std::vector<Item> items;

    std::uint64_t total_tokens() const;
};

// Weighted adjacent-pair counts. Keys pack (first, last) into one 64-bit
// value so the hot counting loop stays on a flat hash map.
struct PairStats {
    std::unordered_map<std::uint64_t, std::uint64_t> counts;

    static std::uint64_t pack(TokenId first, TokenId last) {
        return (static_cast<std::uint64_t>(first) << 32) | last;
    }
    static TokenPair unpack(std::uint64_t key) {
        return {static_cast<TokenId>(key >> 32), static_cast<TokenId>(key & 0xFFFFFFFFu)};
    }

    std::uint64_t count(TokenId first, TokenId last) const {
        auto it = counts.find(pack(first, last));
        return it == counts.end() ? 0 : it->second;
    }
    bool empty() const { return counts.empty(); }
};

// One batch of non-interfering merges plus the pairs that were considered
// but skipped. `considered` preserves the exact consideration order so the
// safety rule can be replayed after the fact.
struct SafeBatch {
    struct Considered {
        TokenPair pair;
        bool merged = false;
    };

    std::vector<Considered> considered;
    std::vector<MergeEntry> merges;

    std::vector<TokenPair> skipped() const;
};

struct TrainReport {
    std::vector<std::uint32_t> batch_sizes;
    std::uint64_t pass_count = 0;
    std::uint64_t merges_made = 0;
    double wall_time_s = 0.0;
    std::vector<double> pass_seconds;
    // Remaining merge budget after each batch, aligned with batch_sizes.
    std::vector<std::uint32_t> merges_remaining;
    // Every selected batch in order, for safety replay and diagnostics.
    std::vector<SafeBatch> batches;
    // Set when the corpus ran out of pairs before the vocabulary filled.
    bool exhausted = false;
    std::string warning;

    double mean_batch_size() const;
    std::uint32_t max_batch_size() const;
};

struct PreparedCorpus {
    TokenSequenceSet sequences;
    std::vector<std::string> stop_chunks;  // token id = kBaseVocabSize + index
};

// Applies the frequency cutoff, extracts the stop list, and converts every
// surviving chunk (stop chunks included; the stop table only affects
// encoding) to a byte-token sequence.
PreparedCorpus prepare_sequences(const ChunkHistogram& h, const TrainConfig& config);

PairStats get_stats(const TokenSequenceSet& seqs, CountingMode mode, unsigned threads = 1);

// min(merges_remaining / cap_divisor, current_vocab_size, max_batch_size),
// floored to 1 so at least one pair is always searched.
std::uint32_t batch_search_limit(std::uint32_t merges_remaining, std::uint32_t current_vocab_size,
                                 const TrainConfig& config);

// Considers the top `limit` pairs by descending weighted count (ties to the
// lexicographically smaller pair) and keeps the ones that pass the
// position-sensitive safety rule. Skipped pairs still poison the seen sets.
// New token ids are assigned consecutively from `next_token_id`.
SafeBatch select_safe_batch(const PairStats& stats, std::uint32_t limit, TokenId next_token_id,
                            bool naive = false);

// One left-to-right pass: every adjacency that is a key of the batch is
// replaced by its new token and scanning resumes after the replacement.
void merge_batch(TokenSequenceSet& seqs, const SafeBatch& batch, unsigned threads = 1);

struct TrainResult {
    TokenizerModel model;
    TrainReport report;
};

// Full training loop: stats -> limit -> safe batch -> merge, one corpus
// pass per batch, until the merge budget is spent or no pairs remain. With
// `threads` > 1 the stats and merge passes are partitioned across workers;
// results are identical to single-threaded execution.
TrainResult train(const ChunkHistogram& h, const TrainConfig& config, unsigned threads = 1);

// Textbook serial BPE: count pairs, merge the single most frequent, repeat.
// Same weighting, counting mode and tie-break as train(), implemented as an
// independent loop for cross-validation.
MergeTable train_serial_reference(const ChunkHistogram& h, const TrainConfig& config);

}  // namespace batchtok
