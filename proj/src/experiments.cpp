#include "batchtok/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>
#include <unordered_set>

#include "batchtok/codec.hpp"
#include "batchtok/errors.hpp"

namespace batchtok {

std::string to_string(SweepParam param) {
    return param == SweepParam::StopListSize ? "stop_list_size" : "freq_cutoff";
}

namespace {

TrainConfig with_param(TrainConfig config, SweepParam param, std::uint64_t value) {
    if (param == SweepParam::StopListSize) {
        config.stop_list_size = static_cast<std::uint32_t>(value);
    } else {
        config.freq_cutoff = value;
    }
    return config;
}

std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

std::vector<SweepRow> run_sweep(const ChunkHistogram& corpus, const TrainConfig& base, SweepParam param,
                                std::vector<std::uint64_t> values, const std::string& eval_text,
                                unsigned jobs) {
    const std::uint64_t baseline_value = param == SweepParam::StopListSize ? 0 : 1;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (std::find(values.begin(), values.end(), baseline_value) == values.end()) {
        throw ConfigError("sweep over " + to_string(param) + " must include the baseline value " +
                          std::to_string(baseline_value));
    }
    for (std::uint64_t v : values) {
        with_param(base, param, v).validate();
    }

    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(values.size())));
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= values.size()) return;
            try {
                const TrainConfig config = with_param(base, param, values[i]);
                TrainResult result = train(corpus, config);
                rows[i].param = param;
                rows[i].value = values[i];
                rows[i].encoded_len = encoded_length(eval_text, result.model);
                rows[i].train_seconds = result.report.wall_time_s;
                rows[i].batch_sizes = std::move(result.report.batch_sizes);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    const auto baseline = std::find_if(rows.begin(), rows.end(),
                                       [&](const SweepRow& r) { return r.value == baseline_value; });
    const double base_len = static_cast<double>(baseline->encoded_len);
    for (auto& row : rows) {
        row.percent_change = base_len ? (static_cast<double>(row.encoded_len) - base_len) / base_len * 100.0 : 0.0;
    }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "param,value,encoded_length,percent_change,train_seconds,batch_sizes\n";
    for (const auto& row : rows) {
        out << to_string(row.param) << ',' << row.value << ',' << row.encoded_len << ',';
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f", row.percent_change);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.3f", row.train_seconds);
        out << buf << ',';
        for (std::size_t i = 0; i < row.batch_sizes.size(); ++i) {
            if (i) out << ';';
            out << row.batch_sizes[i];
        }
        out << '\n';
    }
}

CompareReport run_compare(const ChunkHistogram& corpus, const TrainConfig& config,
                          const std::string& eval_text, unsigned threads) {
    CompareReport report;

    TrainResult batched = train(corpus, config, threads);
    const MergeTable serial_table = train_serial_reference(corpus, config);

    PreparedCorpus prep = prepare_sequences(corpus, config);
    TokenizerModel serial_model(config.split_pattern, std::move(prep.stop_chunks), serial_table);

    report.batched_encoded_len = encoded_length(eval_text, batched.model);
    report.serial_encoded_len = encoded_length(eval_text, serial_model);
    report.encoded_len_delta_pct =
        report.serial_encoded_len
            ? (static_cast<double>(report.batched_encoded_len) - static_cast<double>(report.serial_encoded_len)) /
                  static_cast<double>(report.serial_encoded_len) * 100.0
            : 0.0;

    std::vector<std::string> batched_strings;
    std::vector<std::string> serial_strings;
    for (const auto& e : batched.model.merges().entries) {
        batched_strings.push_back(batched.model.token_bytes(e.new_token));
    }
    for (const auto& e : serial_table.entries) {
        serial_strings.push_back(serial_model.token_bytes(e.new_token));
    }
    report.merge_table_edit_distance = levenshtein(batched_strings, serial_strings);

    const std::unordered_set<std::string> serial_set(serial_strings.begin(), serial_strings.end());
    std::size_t shared = 0;
    const std::unordered_set<std::string> batched_set(batched_strings.begin(), batched_strings.end());
    for (const auto& s : batched_set) {
        if (serial_set.count(s)) ++shared;
    }
    const std::size_t denom = std::max(batched_set.size(), serial_set.size());
    report.shared_vocab_fraction = denom ? static_cast<double>(shared) / static_cast<double>(denom) : 1.0;

    report.batched_report = std::move(batched.report);
    return report;
}

void write_train_report_csv(const TrainReport& report, std::ostream& out) {
    out << "batch,batch_size,merges_remaining,pass_seconds\n";
    for (std::size_t i = 0; i < report.batch_sizes.size(); ++i) {
        out << i << ',' << report.batch_sizes[i] << ',' << report.merges_remaining[i] << ',';
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", report.pass_seconds[i]);
        out << buf << '\n';
    }
}

}  // namespace batchtok
