#include "batchtok/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "batchtok/errors.hpp"

namespace batchtok {

namespace {

using Clock = std::chrono::steady_clock;
using PairCountMap = std::unordered_map<std::uint64_t, std::uint64_t>;
using MergeMap = std::unordered_map<std::uint64_t, TokenId>;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn(begin, end, worker) over [0, n), partitioned when it pays off.
template <typename Fn>
void for_ranges(std::size_t n, unsigned threads, Fn&& fn) {
    constexpr std::size_t kMinPerWorker = 2048;
    const unsigned workers =
        threads <= 1 ? 1 : static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n / kMinPerWorker, 1)));
    if (workers <= 1) {
        fn(std::size_t{0}, n, 0u);
        return;
    }
    const std::size_t per = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * per;
        const std::size_t end = std::min(n, begin + per);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
    }
    for (auto& t : pool) t.join();
}

void count_item(const TokenSequenceSet::Item& item, CountingMode mode, PairCountMap& counts) {
    const auto& t = item.tokens;
    const std::uint64_t f = item.freq;
    if (t.size() < 2) return;
    if (mode == CountingMode::Overcount) {
        for (std::size_t i = 0; i + 1 < t.size(); ++i) {
            counts[PairStats::pack(t[i], t[i + 1])] += f;
        }
        return;
    }
    // Non-overlapping: inside a run of equal tokens only every other
    // adjacency is countable, so a run of k contributes floor(k/2).
    std::size_t run_start = 0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        if (t[i] != t[i + 1]) {
            run_start = i + 1;
            counts[PairStats::pack(t[i], t[i + 1])] += f;
        } else if ((i - run_start) % 2 == 0) {
            counts[PairStats::pack(t[i], t[i + 1])] += f;
        }
    }
}

void merge_item(std::vector<TokenId>& t, const MergeMap& merges) {
    const std::size_t n = t.size();
    std::size_t w = 0;
    std::size_t r = 0;
    while (r < n) {
        if (r + 1 < n) {
            auto it = merges.find(PairStats::pack(t[r], t[r + 1]));
            if (it != merges.end()) {
                t[w++] = it->second;
                r += 2;
                continue;
            }
        }
        t[w++] = t[r++];
    }
    t.resize(w);
}

// Fused pass for Overcount mode: applies `merges` (may be null) while
// tallying the adjacencies of the merged output, one corpus walk total.
void merge_and_count_item(TokenSequenceSet::Item& item, const MergeMap* merges, PairCountMap& counts) {
    auto& t = item.tokens;
    const std::uint64_t f = item.freq;
    const std::size_t n = t.size();
    std::size_t w = 0;
    std::size_t r = 0;
    while (r < n) {
        TokenId tok;
        if (merges && r + 1 < n) {
            auto it = merges->find(PairStats::pack(t[r], t[r + 1]));
            if (it != merges->end()) {
                tok = it->second;
                r += 2;
            } else {
                tok = t[r++];
            }
        } else {
            tok = t[r++];
        }
        if (w > 0) counts[PairStats::pack(t[w - 1], tok)] += f;
        t[w++] = tok;
    }
    t.resize(w);
}

PairStats sum_worker_counts(std::vector<PairCountMap>& locals) {
    PairStats stats;
    std::size_t biggest = 0;
    for (std::size_t i = 1; i < locals.size(); ++i) {
        if (locals[i].size() > locals[biggest].size()) biggest = i;
    }
    stats.counts = std::move(locals[biggest]);
    for (std::size_t i = 0; i < locals.size(); ++i) {
        if (i == biggest) continue;
        for (const auto& [key, cnt] : locals[i]) stats.counts[key] += cnt;
    }
    return stats;
}

PairStats merge_and_count(TokenSequenceSet& seqs, const MergeMap* merges, unsigned threads) {
    std::vector<PairCountMap> locals(std::max(1u, threads));
    for_ranges(seqs.items.size(), threads, [&](std::size_t begin, std::size_t end, unsigned w) {
        for (std::size_t i = begin; i < end; ++i) {
            merge_and_count_item(seqs.items[i], merges, locals[w]);
        }
    });
    return sum_worker_counts(locals);
}

MergeMap merge_map_of(const SafeBatch& batch) {
    MergeMap m;
    m.reserve(batch.merges.size() * 2);
    for (const auto& e : batch.merges) {
        m.emplace(PairStats::pack(e.pair.first, e.pair.second), e.new_token);
    }
    return m;
}

void apply_merge_map(TokenSequenceSet& seqs, const MergeMap& merges, unsigned threads) {
    for_ranges(seqs.items.size(), threads, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t i = begin; i < end; ++i) {
            merge_item(seqs.items[i].tokens, merges);
        }
    });
}

}  // namespace

void TrainConfig::validate() const {
    if (cap_divisor < 1) throw ConfigError("cap_divisor must be >= 1");
    if (max_batch_size < 1) throw ConfigError("max_batch_size must be >= 1");
    if (freq_cutoff < 1) throw ConfigError("freq_cutoff must be >= 1");
    if (vocab_size < kBaseVocabSize + stop_list_size) {
        throw ConfigError("vocab_size must be at least 256 + stop_list_size (= " +
                          std::to_string(kBaseVocabSize + stop_list_size) + "), got " +
                          std::to_string(vocab_size));
    }
}

std::uint64_t TokenSequenceSet::total_tokens() const {
    std::uint64_t n = 0;
    for (const auto& item : items) n += item.tokens.size();
    return n;
}

std::vector<TokenPair> SafeBatch::skipped() const {
    std::vector<TokenPair> out;
    for (const auto& c : considered) {
        if (!c.merged) out.push_back(c.pair);
    }
    return out;
}

double TrainReport::mean_batch_size() const {
    if (batch_sizes.empty()) return 0.0;
    return static_cast<double>(merges_made) / static_cast<double>(batch_sizes.size());
}

std::uint32_t TrainReport::max_batch_size() const {
    std::uint32_t best = 0;
    for (std::uint32_t s : batch_sizes) best = std::max(best, s);
    return best;
}

PreparedCorpus prepare_sequences(const ChunkHistogram& h, const TrainConfig& config) {
    config.validate();
    const ChunkHistogram filtered = apply_freq_cutoff(h, config.freq_cutoff);
    if (filtered.empty()) {
        throw TrainError("no chunks remain after applying freq_cutoff " + std::to_string(config.freq_cutoff));
    }

    PreparedCorpus out;
    out.stop_chunks = extract_stop_list(filtered, config.stop_list_size);

    // Canonical order; stop chunks stay in the training set as byte
    // sequences, their occurrences still shape the merge statistics.
    auto rows = filtered.sorted_entries();
    out.sequences.items.reserve(rows.size());
    for (auto& [chunk, count] : rows) {
        TokenSequenceSet::Item item;
        item.freq = count;
        item.tokens.reserve(chunk.size());
        for (unsigned char b : chunk) item.tokens.push_back(b);
        out.sequences.items.push_back(std::move(item));
    }
    return out;
}

PairStats get_stats(const TokenSequenceSet& seqs, CountingMode mode, unsigned threads) {
    std::vector<PairCountMap> locals(std::max(1u, threads));
    for_ranges(seqs.items.size(), threads, [&](std::size_t begin, std::size_t end, unsigned w) {
        for (std::size_t i = begin; i < end; ++i) {
            count_item(seqs.items[i], mode, locals[w]);
        }
    });
    return sum_worker_counts(locals);
}

std::uint32_t batch_search_limit(std::uint32_t merges_remaining, std::uint32_t current_vocab_size,
                                 const TrainConfig& config) {
    const std::uint32_t capped = std::min(
        {merges_remaining / config.cap_divisor, current_vocab_size, config.max_batch_size});
    return std::max<std::uint32_t>(capped, 1);
}

SafeBatch select_safe_batch(const PairStats& stats, std::uint32_t limit, TokenId next_token_id, bool naive) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> rows(stats.counts.begin(), stats.counts.end());
    const auto by_count_desc = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    };
    const std::size_t top = std::min<std::size_t>(limit, rows.size());
    if (top < rows.size()) {
        std::nth_element(rows.begin(), rows.begin() + top, rows.end(), by_count_desc);
        rows.resize(top);
    }
    std::sort(rows.begin(), rows.end(), by_count_desc);

    SafeBatch batch;
    if (naive) {
        // Token-disjoint rule: stop at the first pair sharing any token
        // with the batch.
        std::unordered_set<TokenId> used;
        for (const auto& [key, count] : rows) {
            const TokenPair pair = PairStats::unpack(key);
            if (used.count(pair.first) || used.count(pair.second)) break;
            used.insert(pair.first);
            used.insert(pair.second);
            batch.considered.push_back({pair, true});
            batch.merges.push_back({pair, next_token_id++});
        }
        return batch;
    }

    std::unordered_set<TokenId> seen_first;
    std::unordered_set<TokenId> seen_last;
    for (const auto& [key, count] : rows) {
        const TokenPair pair = PairStats::unpack(key);
        const bool unsafe = seen_last.count(pair.first) || seen_first.count(pair.second);
        // Skipped pairs enter the seen sets too, so later pairs cannot
        // interfere with anything that outranked them.
        seen_first.insert(pair.first);
        seen_last.insert(pair.second);
        batch.considered.push_back({pair, !unsafe});
        if (!unsafe) {
            batch.merges.push_back({pair, next_token_id++});
        }
    }
    return batch;
}

void merge_batch(TokenSequenceSet& seqs, const SafeBatch& batch, unsigned threads) {
    if (batch.merges.empty()) return;
    const TokenId current_vocab = batch.merges.front().new_token;
    for (const auto& e : batch.merges) {
        if (e.pair.first >= current_vocab || e.pair.second >= current_vocab) {
            throw std::logic_error("merge_batch: pair references a token id outside the current vocabulary");
        }
    }
    apply_merge_map(seqs, merge_map_of(batch), threads);
}

TrainResult train(const ChunkHistogram& h, const TrainConfig& config, unsigned threads) {
    config.validate();
    const auto t_start = Clock::now();

    PreparedCorpus prep = prepare_sequences(h, config);
    TokenSequenceSet& seqs = prep.sequences;

    std::uint32_t merges_remaining = config.merge_budget();
    TokenId next_id = kBaseVocabSize + config.stop_list_size;
    MergeTable table;
    table.entries.reserve(merges_remaining);
    TrainReport report;

    MergeMap pending;
    bool has_pending = false;
    while (merges_remaining > 0) {
        const auto t_pass = Clock::now();

        PairStats stats;
        if (config.counting_mode == CountingMode::Overcount) {
            // fused fast path: merge the previous batch and recount in a
            // single corpus walk
            stats = merge_and_count(seqs, has_pending ? &pending : nullptr, threads);
        } else {
            if (has_pending) apply_merge_map(seqs, pending, threads);
            stats = get_stats(seqs, config.counting_mode, threads);
        }
        has_pending = false;

        if (stats.empty()) {
            report.exhausted = true;
            report.warning = "corpus exhausted with " + std::to_string(merges_remaining) +
                             " merges remaining; returning partial vocabulary";
            break;
        }

        const std::uint32_t limit = batch_search_limit(merges_remaining, next_id, config);
        SafeBatch batch = select_safe_batch(stats, limit, next_id, config.naive_batching);

        const auto n = static_cast<std::uint32_t>(batch.merges.size());
        table.entries.insert(table.entries.end(), batch.merges.begin(), batch.merges.end());
        next_id += n;
        merges_remaining -= n;
        report.batch_sizes.push_back(n);
        report.merges_remaining.push_back(merges_remaining);
        report.merges_made += n;

        if (merges_remaining > 0) {
            // the last batch never needs applying
            pending = merge_map_of(batch);
            has_pending = true;
        }
        report.batches.push_back(std::move(batch));
        report.pass_seconds.push_back(seconds_since(t_pass));
    }

    report.pass_count = report.batch_sizes.size();
    report.wall_time_s = seconds_since(t_start);

    TokenizerModel model(config.split_pattern, std::move(prep.stop_chunks), std::move(table));
    return TrainResult{std::move(model), std::move(report)};
}

MergeTable train_serial_reference(const ChunkHistogram& h, const TrainConfig& config) {
    config.validate();
    PreparedCorpus prep = prepare_sequences(h, config);
    auto& items = prep.sequences.items;

    std::uint32_t remaining = config.merge_budget();
    TokenId next_id = kBaseVocabSize + config.stop_list_size;
    MergeTable table;

    while (remaining > 0) {
        // Tally pair frequencies from scratch.
        PairCountMap counts;
        for (const auto& item : items) {
            const auto& t = item.tokens;
            for (std::size_t i = 0; i + 1 < t.size(); ++i) {
                if (config.counting_mode == CountingMode::NonOverlapping && t[i] == t[i + 1]) {
                    std::size_t back = i;
                    while (back > 0 && t[back - 1] == t[i]) --back;
                    if ((i - back) % 2 != 0) continue;
                }
                counts[PairStats::pack(t[i], t[i + 1])] += item.freq;
            }
        }
        if (counts.empty()) break;

        // The single most frequent pair, ties to the smaller pair.
        std::uint64_t best_key = 0;
        std::uint64_t best_count = 0;
        for (const auto& [key, count] : counts) {
            if (count > best_count || (count == best_count && key < best_key)) {
                best_key = key;
                best_count = count;
            }
        }
        const TokenPair pair = PairStats::unpack(best_key);

        for (auto& item : items) {
            auto& t = item.tokens;
            std::vector<TokenId> merged;
            merged.reserve(t.size());
            std::size_t i = 0;
            while (i < t.size()) {
                if (i + 1 < t.size() && t[i] == pair.first && t[i + 1] == pair.second) {
                    merged.push_back(next_id);
                    i += 2;
                } else {
                    merged.push_back(t[i]);
                    ++i;
                }
            }
            t = std::move(merged);
        }

        table.entries.push_back({pair, next_id});
        ++next_id;
        --remaining;
    }
    return table;
}

}  // namespace batchtok
