#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "batchtok/codec.hpp"
#include "batchtok/errors.hpp"
#include "batchtok/experiments.hpp"
#include "batchtok/histogram.hpp"
#include "batchtok/ingest.hpp"
#include "batchtok/model_io.hpp"
#include "batchtok/trainer.hpp"

namespace bt = batchtok;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

bt::SplitPattern pattern_from_name(const std::string& name) {
    if (name == "gpt4") return bt::SplitPattern::gpt4();
    throw bt::ConfigError("unknown split pattern \"" + name + "\" (use gpt4, or train from a model file)");
}

void print_stats(const bt::CorpusStats& stats, bool with_buckets) {
    std::printf("total_chunks=%llu\n", static_cast<unsigned long long>(stats.total_chunks));
    std::printf("unique_chunks=%llu\n", static_cast<unsigned long long>(stats.unique_chunks));
    std::printf("unique_fraction=%.6f\n", stats.unique_fraction);
    std::printf("top_%llu_share=%.4f\n", static_cast<unsigned long long>(stats.top_k), stats.top_k_share);
    if (with_buckets) {
        for (const auto& [bucket, n] : stats.frequency_histogram) {
            if (bucket == stats.tail_bucket_start) {
                std::printf("chunks_with_count_ge_%llu=%llu\n", static_cast<unsigned long long>(bucket),
                            static_cast<unsigned long long>(n));
            } else {
                std::printf("chunks_with_count_%llu=%llu\n", static_cast<unsigned long long>(bucket),
                            static_cast<unsigned long long>(n));
            }
        }
    }
}

struct TrainFlags {
    std::uint32_t vocab_size = 512;
    std::uint32_t stop_list_size = 0;
    std::uint64_t freq_cutoff = 1;
    std::uint32_t cap_divisor = 2;
    std::uint32_t max_batch_size = 0;  // 0 = unbounded
    bool overcount = false;
    bool naive = false;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--vocab-size", vocab_size, "Target vocabulary size, including the 256 base bytes");
        cmd.add_option("--stop-list-size", stop_list_size, "Number of most-common chunks given dedicated tokens");
        cmd.add_option("--freq-cutoff", freq_cutoff, "Drop chunks occurring fewer than this many times");
        cmd.add_option("--cap-divisor", cap_divisor, "Search at most merges_remaining/cap_divisor pairs per batch");
        cmd.add_option("--max-batch-size", max_batch_size, "Hard cap on pairs searched per batch (0 = unbounded)");
        cmd.add_flag("--overcount", overcount, "Count repeated-token runs as k-1 pairs and fuse count+merge passes");
        cmd.add_flag("--naive-batching", naive, "Token-disjoint batch selection, for batch-size comparisons");
    }

    bt::TrainConfig to_config(const bt::SplitPattern& pattern) const {
        bt::TrainConfig config;
        config.vocab_size = vocab_size;
        config.stop_list_size = stop_list_size;
        config.freq_cutoff = freq_cutoff;
        config.cap_divisor = cap_divisor;
        config.max_batch_size = max_batch_size == 0 ? bt::kUnboundedBatch : max_batch_size;
        config.split_pattern = pattern;
        config.counting_mode = overcount ? bt::CountingMode::Overcount : bt::CountingMode::NonOverlapping;
        config.naive_batching = naive;
        return config;
    }
};

bt::ChunkHistogram load_corpus(const std::string& path, const std::string& pattern_name,
                               bt::DocDelimiting delimiting, unsigned threads) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        return bt::load_csv(path, pattern_name);
    }
    return bt::ingest_files({path}, pattern_from_name(pattern_name), delimiting, threads);
}

int cmd_ingest(const std::vector<std::string>& inputs, const std::string& pattern_name,
               const std::string& output, bool per_line, bool merge, unsigned threads) {
    const bt::SplitPattern pattern = pattern_from_name(pattern_name);
    bt::ChunkHistogram h = bt::ingest_files(
        inputs, pattern, per_line ? bt::DocDelimiting::PerLine : bt::DocDelimiting::WholeFile, threads);
    if (merge) {
        std::ifstream existing(output, std::ios::binary);
        if (existing) {
            h = bt::merge_histograms(bt::load_csv(existing, pattern.name), h);
        }
    }
    bt::save_csv(h, output);
    print_stats(bt::compute_stats(h, 100), false);
    std::fprintf(stderr, "wrote %s\n", output.c_str());
    return 0;
}

int cmd_train(const std::string& corpus, const TrainFlags& flags, const std::string& pattern_name,
              const std::string& model_out, std::string report_out, bool per_line, unsigned threads) {
    const bt::ChunkHistogram h = load_corpus(
        corpus, pattern_name, per_line ? bt::DocDelimiting::PerLine : bt::DocDelimiting::WholeFile, threads);
    const bt::TrainConfig config = flags.to_config(pattern_from_name(pattern_name));

    bt::TrainResult result = bt::train(h, config, threads);
    bt::save_model(result.model, model_out);

    if (report_out.empty()) report_out = model_out + ".report.csv";
    std::ofstream report(report_out, std::ios::binary);
    if (!report) throw bt::IoError("cannot open " + report_out + " for writing");
    bt::write_train_report_csv(result.report, report);

    const auto& r = result.report;
    std::printf("merges=%llu batches=%llu mean_batch=%.2f max_batch=%u wall_time_s=%.3f\n",
                static_cast<unsigned long long>(r.merges_made), static_cast<unsigned long long>(r.pass_count),
                r.mean_batch_size(), r.max_batch_size(), r.wall_time_s);
    if (!r.warning.empty()) std::fprintf(stderr, "warning: %s\n", r.warning.c_str());
    std::fprintf(stderr, "wrote %s and %s\n", model_out.c_str(), report_out.c_str());
    return 0;
}

int cmd_encode(const std::string& model_path, const std::string& input, const std::string& output) {
    const bt::TokenizerModel model = bt::load_model(model_path);
    const std::string text = input.empty() ? std::string(std::istreambuf_iterator<char>(std::cin), {})
                                           : bt::read_file(input);
    const std::vector<bt::TokenId> ids = bt::encode(text, model);
    std::ostringstream out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out << ' ';
        out << ids[i];
    }
    if (!ids.empty()) out << '\n';
    if (output.empty()) {
        std::cout << out.str();
    } else {
        bt::write_file(output, out.str());
    }
    return 0;
}

int cmd_decode(const std::string& model_path, const std::string& input, const std::string& output, bool strict) {
    const bt::TokenizerModel model = bt::load_model(model_path);
    const std::string text = input.empty() ? std::string(std::istreambuf_iterator<char>(std::cin), {})
                                           : bt::read_file(input);
    std::vector<bt::TokenId> ids;
    std::istringstream in(text);
    std::string field;
    while (in >> field) {
        unsigned long long value = 0;
        try {
            if (field.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument(field);
            value = std::stoull(field);
            if (value > std::numeric_limits<bt::TokenId>::max()) throw std::out_of_range(field);
        } catch (const std::logic_error&) {
            throw bt::ParseError("token at position " + std::to_string(ids.size()) + " is not a token id: \"" +
                                 field + "\"");
        }
        ids.push_back(static_cast<bt::TokenId>(value));
    }
    const std::string decoded = bt::decode(ids, model, strict ? bt::Utf8Policy::Strict : bt::Utf8Policy::Replace);
    if (output.empty()) {
        std::cout << decoded;
    } else {
        bt::write_file(output, decoded);
    }
    return 0;
}

int cmd_stats(const std::string& corpus, const std::string& pattern_name, std::uint64_t top_k,
              std::uint64_t tail_bucket, bool per_line) {
    const bt::ChunkHistogram h = load_corpus(
        corpus, pattern_name, per_line ? bt::DocDelimiting::PerLine : bt::DocDelimiting::WholeFile, 1);
    print_stats(bt::compute_stats(h, top_k, tail_bucket), true);
    return 0;
}

int cmd_sweep(const std::string& corpus, const std::string& pattern_name, const TrainFlags& flags,
              const std::string& param_name, const std::vector<std::uint64_t>& values,
              const std::string& eval_path, const std::string& output, unsigned jobs) {
    if (param_name != "stop_list_size" && param_name != "freq_cutoff") {
        throw bt::ConfigError("--param must be stop_list_size or freq_cutoff");
    }
    const bt::SweepParam param = param_name == "stop_list_size" ? bt::SweepParam::StopListSize
                                                                : bt::SweepParam::FreqCutoff;
    const bt::ChunkHistogram h = load_corpus(corpus, pattern_name, bt::DocDelimiting::WholeFile, jobs);
    const std::string eval_text = bt::read_file(eval_path);
    const auto rows = bt::run_sweep(h, flags.to_config(pattern_from_name(pattern_name)), param, values,
                                    eval_text, jobs);
    if (output.empty()) {
        bt::write_sweep_csv(rows, std::cout);
    } else {
        std::ofstream out(output, std::ios::binary);
        if (!out) throw bt::IoError("cannot open " + output + " for writing");
        bt::write_sweep_csv(rows, out);
        std::fprintf(stderr, "wrote %s\n", output.c_str());
    }
    return 0;
}

int cmd_compare(const std::string& corpus, const std::string& pattern_name, const TrainFlags& flags,
                const std::string& eval_path, unsigned threads) {
    const bt::ChunkHistogram h = load_corpus(corpus, pattern_name, bt::DocDelimiting::WholeFile, threads);
    const std::string eval_text = bt::read_file(eval_path);
    const bt::CompareReport report =
        bt::run_compare(h, flags.to_config(pattern_from_name(pattern_name)), eval_text, threads);
    std::printf("batched_encoded_length=%llu\n", static_cast<unsigned long long>(report.batched_encoded_len));
    std::printf("serial_encoded_length=%llu\n", static_cast<unsigned long long>(report.serial_encoded_len));
    std::printf("encoded_length_delta_pct=%.6f\n", report.encoded_len_delta_pct);
    std::printf("merge_table_edit_distance=%zu\n", report.merge_table_edit_distance);
    std::printf("shared_vocab_fraction=%.6f\n", report.shared_vocab_fraction);
    std::printf("batched_mean_batch_size=%.2f\n", report.batched_report.mean_batch_size());
    std::printf("batched_pass_count=%llu\n", static_cast<unsigned long long>(report.batched_report.pass_count));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BPE tokenizer trainer with batched merges and histogram-backed corpora"};
    app.require_subcommand(1);

    std::string pattern_name = "gpt4";
    app.add_option("--pattern", pattern_name, "Split pattern name")->capture_default_str();
    unsigned threads = 1;
    app.add_option("--threads,--jobs", threads, "Worker threads (results are identical regardless)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Build a chunk-frequency CSV from text files or directories");
    std::vector<std::string> ingest_inputs;
    std::string ingest_output;
    bool ingest_per_line = false;
    bool ingest_merge = false;
    ingest->add_option("inputs", ingest_inputs, "Text files or directories")->required();
    ingest->add_option("-o,--output", ingest_output, "Histogram CSV to write")->required();
    ingest->add_flag("--per-line", ingest_per_line, "Treat each line as its own document");
    ingest->add_flag("--merge", ingest_merge, "Merge counts into the output CSV if it already exists");

    // stats
    auto* stats = app.add_subcommand("stats", "Print corpus statistics for a histogram CSV or text file");
    std::string stats_corpus;
    std::uint64_t stats_top_k = 100;
    std::uint64_t stats_tail = 16;
    bool stats_per_line = false;
    stats->add_option("corpus", stats_corpus, "Histogram CSV or text input")->required();
    stats->add_option("--top-k", stats_top_k, "How many top chunks the share statistic covers");
    stats->add_option("--tail-bucket", stats_tail, "Counts at or above this collapse into one bucket");
    stats->add_flag("--per-line", stats_per_line, "Treat each line as its own document");

    // train
    auto* train = app.add_subcommand("train", "Train a tokenizer model from a histogram CSV or text file");
    std::string train_corpus;
    std::string train_model_out;
    std::string train_report_out;
    bool train_per_line = false;
    TrainFlags train_flags;
    train->add_option("corpus", train_corpus, "Histogram CSV or text input")->required();
    train->add_option("-o,--model", train_model_out, "Model file to write")->required();
    train->add_option("--report", train_report_out, "Per-batch report CSV (default: <model>.report.csv)");
    train->add_flag("--per-line", train_per_line, "Treat each line as its own document");
    train_flags.add_to(*train);

    // encode / decode
    auto* encode = app.add_subcommand("encode", "Encode text to whitespace-separated token ids");
    std::string enc_model, enc_in, enc_out;
    encode->add_option("-m,--model", enc_model, "Model file")->required();
    encode->add_option("-i,--input", enc_in, "Input text file (default: stdin)");
    encode->add_option("-o,--output", enc_out, "Output ids file (default: stdout)");

    auto* decode = app.add_subcommand("decode", "Decode whitespace-separated token ids back to text");
    std::string dec_model, dec_in, dec_out;
    bool dec_strict = false;
    decode->add_option("-m,--model", dec_model, "Model file")->required();
    decode->add_option("-i,--input", dec_in, "Input ids file (default: stdin)");
    decode->add_option("-o,--output", dec_out, "Output text file (default: stdout)");
    decode->add_flag("--strict", dec_strict, "Fail on invalid UTF-8 instead of substituting U+FFFD");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Train one model per parameter value and compare encoded lengths");
    std::string sweep_corpus, sweep_param, sweep_eval, sweep_out;
    std::vector<std::uint64_t> sweep_values;
    TrainFlags sweep_flags;
    sweep->add_option("corpus", sweep_corpus, "Histogram CSV or text input")->required();
    sweep->add_option("--param", sweep_param, "stop_list_size or freq_cutoff")->required();
    sweep->add_option("--values", sweep_values, "Parameter values; must include the baseline (0 or 1)")
        ->required()
        ->delimiter(',');
    sweep->add_option("--eval", sweep_eval, "Held-out text whose encoded length is measured")->required();
    sweep->add_option("-o,--output", sweep_out, "Result CSV (default: stdout)");
    sweep_flags.add_to(*sweep);

    // compare
    auto* compare = app.add_subcommand("compare", "Train batched and serial models and report their divergence");
    std::string cmp_corpus, cmp_eval;
    TrainFlags cmp_flags;
    compare->add_option("corpus", cmp_corpus, "Histogram CSV or text input")->required();
    compare->add_option("--eval", cmp_eval, "Held-out text whose encoded length is measured")->required();
    cmp_flags.add_to(*compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*ingest) return cmd_ingest(ingest_inputs, pattern_name, ingest_output, ingest_per_line, ingest_merge, threads);
        if (*stats) return cmd_stats(stats_corpus, pattern_name, stats_top_k, stats_tail, stats_per_line);
        if (*train) return cmd_train(train_corpus, train_flags, pattern_name, train_model_out, train_report_out, train_per_line, threads);
        if (*encode) return cmd_encode(enc_model, enc_in, enc_out);
        if (*decode) return cmd_decode(dec_model, dec_in, dec_out, dec_strict);
        if (*sweep) return cmd_sweep(sweep_corpus, pattern_name, sweep_flags, sweep_param, sweep_values, sweep_eval, sweep_out, threads);
        if (*compare) return cmd_compare(cmp_corpus, pattern_name, cmp_flags, cmp_eval, threads);
    } catch (const bt::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return 0;
}
