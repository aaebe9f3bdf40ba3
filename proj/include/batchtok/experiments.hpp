#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "batchtok/histogram.hpp"
#include "batchtok/trainer.hpp"

namespace batchtok {

// Which training parameter a sweep varies.
enum class SweepParam { StopListSize, FreqCutoff };

std::string to_string(SweepParam param);

struct SweepRow {
    SweepParam param = SweepParam::StopListSize;
    std::uint64_t value = 0;
    std::uint64_t encoded_len = 0;
    double percent_change = 0.0;  // vs the baseline row, out of 100
    double train_seconds = 0.0;   // wall time, not reproducible across runs
    std::vector<std::uint32_t> batch_sizes;
};

// Trains one model per value on the same corpus and measures the encoded
// length of `eval_text` under each. `values` must contain the parameter's
// baseline (stop_list_size=0 / freq_cutoff=1); percent_change is relative
// to that row. Rows come back sorted by value. With jobs > 1, trainings run
// in parallel; each training is deterministic so the rows are too.
std::vector<SweepRow> run_sweep(const ChunkHistogram& corpus, const TrainConfig& base, SweepParam param,
                                std::vector<std::uint64_t> values, const std::string& eval_text,
                                unsigned jobs = 1);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

struct CompareReport {
    std::uint64_t batched_encoded_len = 0;
    std::uint64_t serial_encoded_len = 0;
    double encoded_len_delta_pct = 0.0;  // (batched - serial) / serial, out of 100
    // Levenshtein distance between the two merge tables viewed as sequences
    // of merged byte strings.
    std::size_t merge_table_edit_distance = 0;
    // Fraction of merge-produced token byte strings present in both models.
    double shared_vocab_fraction = 0.0;
    TrainReport batched_report;
};

// Trains a batched and a serial model with identical settings and reports
// how far apart they end up.
CompareReport run_compare(const ChunkHistogram& corpus, const TrainConfig& config,
                          const std::string& eval_text, unsigned threads = 1);

// One row per batch: batch index, size, merges remaining, pass seconds.
void write_train_report_csv(const TrainReport& report, std::ostream& out);

}  // namespace batchtok
