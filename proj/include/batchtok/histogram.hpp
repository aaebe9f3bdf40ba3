#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "batchtok/split.hpp"

namespace batchtok {

// The compressed form of a corpus: every unique text chunk mapped to its
// occurrence count. Chunks are byte strings; counts are always >= 1.
class ChunkHistogram {
public:
    ChunkHistogram() = default;
    explicit ChunkHistogram(std::string split_pattern_name)
        : split_pattern_name_(std::move(split_pattern_name)) {}

    void add(std::string_view chunk, std::uint64_t n = 1);

    std::uint64_t total() const { return total_; }
    std::uint64_t unique() const { return static_cast<std::uint64_t>(entries_.size()); }
    std::uint64_t count(std::string_view chunk) const;
    bool empty() const { return entries_.empty(); }

    const std::unordered_map<std::string, std::uint64_t>& entries() const { return entries_; }
    const std::string& split_pattern_name() const { return split_pattern_name_; }

    // Entries sorted by descending count, ties by ascending chunk bytes.
    // This is the canonical order used everywhere determinism matters.
    std::vector<std::pair<std::string, std::uint64_t>> sorted_entries() const;

    bool operator==(const ChunkHistogram& other) const {
        return split_pattern_name_ == other.split_pattern_name_ && entries_ == other.entries_;
    }

private:
    std::unordered_map<std::string, std::uint64_t> entries_;
    std::uint64_t total_ = 0;
    std::string split_pattern_name_;
};

struct CorpusStats {
    std::uint64_t total_chunks = 0;
    std::uint64_t unique_chunks = 0;
    double unique_fraction = 0.0;
    std::uint64_t top_k = 0;
    double top_k_share = 0.0;
    // occurrence-count bucket -> number of unique chunks with that count;
    // counts >= tail_bucket_start collapse into the final bucket.
    std::map<std::uint64_t, std::uint64_t> frequency_histogram;
    std::uint64_t tail_bucket_start = 0;
};

ChunkHistogram build_histogram(const std::vector<std::string>& documents, const SplitPattern& pattern);

// Entrywise sum. Both inputs must carry the same split pattern name.
ChunkHistogram merge_histograms(const ChunkHistogram& a, const ChunkHistogram& b);

// Keeps exactly the entries with count >= cutoff. cutoff must be >= 1;
// cutoff == 1 returns the input unchanged.
ChunkHistogram apply_freq_cutoff(const ChunkHistogram& h, std::uint64_t cutoff);

// The n most frequent chunks in descending count order, ties broken by
// ascending chunk bytes. n must not exceed unique(h).
std::vector<std::string> extract_stop_list(const ChunkHistogram& h, std::uint64_t n);

CorpusStats compute_stats(const ChunkHistogram& h, std::uint64_t top_k, std::uint64_t tail_bucket_start = 16);

// 2-column CSV with a `chunk,count` header. Fields containing separators,
// quotes or newlines are double-quoted with embedded quotes doubled. Rows
// are written in canonical (count desc, chunk asc) order. Chunks must be
// valid UTF-8; anything else is rejected.
void save_csv(const ChunkHistogram& h, std::ostream& out);
void save_csv(const ChunkHistogram& h, const std::string& path);

// Inverse of save_csv. Malformed rows raise ParseError with the offending
// line number. The file format carries no pattern metadata, so the caller
// supplies the pattern name recorded on the loaded histogram.
ChunkHistogram load_csv(std::istream& in, std::string pattern_name = "gpt4");
ChunkHistogram load_csv(const std::string& path, std::string pattern_name = "gpt4");

}  // namespace batchtok
