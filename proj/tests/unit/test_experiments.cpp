#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "batchtok/errors.hpp"
#include "batchtok/experiments.hpp"
#include "corpus_gen.hpp"

using namespace batchtok;

namespace {

ChunkHistogram small_corpus() {
    return build_histogram({testing::synth_english(19, 24 << 10)}, SplitPattern::gpt4());
}

TrainConfig base_config(std::uint32_t vocab_size) {
    TrainConfig c;
    c.vocab_size = vocab_size;
    return c;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("sweep rows are sorted with a zero baseline") {
    const auto corpus = small_corpus();
    const std::string eval_text = testing::synth_english(23, 4 << 10);
    const auto rows = run_sweep(corpus, base_config(300), SweepParam::StopListSize, {5, 0, 2},
                                eval_text, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].value == 0);
    CHECK(rows[0].percent_change == 0.0);
    CHECK(rows[1].value == 2);
    CHECK(rows[2].value == 5);
    for (const auto& row : rows) CHECK(row.encoded_len > 0);
}

TEST_CASE("sweep requires the baseline value") {
    const auto corpus = small_corpus();
    CHECK_THROWS_AS(run_sweep(corpus, base_config(300), SweepParam::FreqCutoff, {2, 3}, "x", 1),
                    ConfigError);
}

TEST_CASE("errors inside sweep workers propagate") {
    ChunkHistogram tiny("gpt4");
    tiny.add("a", 5);
    tiny.add("b", 3);
    // stop_list_size=9 exceeds the corpus's two unique chunks
    CHECK_THROWS_AS(run_sweep(tiny, base_config(400), SweepParam::StopListSize, {0, 9}, "ab", 2),
                    ConfigError);
}

TEST_CASE("sweep csv has one line per row plus a header") {
    const auto corpus = small_corpus();
    const auto rows = run_sweep(corpus, base_config(280), SweepParam::FreqCutoff, {1, 2},
                                testing::synth_english(29, 2 << 10), 1);
    std::ostringstream out;
    write_sweep_csv(rows, out);
    const std::string text = out.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.rfind("param,value,", 0) == 0);
}

TEST_CASE("compare reports zero divergence when batching is disabled") {
    const auto corpus = small_corpus();
    TrainConfig config = base_config(300);
    config.max_batch_size = 1;
    const auto report = run_compare(corpus, config, testing::synth_english(37, 4 << 10));
    CHECK(report.merge_table_edit_distance == 0);
    CHECK(report.shared_vocab_fraction == doctest::Approx(1.0));
    CHECK(report.batched_encoded_len == report.serial_encoded_len);
}

TEST_CASE("compare reports bounded divergence for batched training") {
    const auto corpus = small_corpus();
    const auto report = run_compare(corpus, base_config(400), testing::synth_english(41, 4 << 10));
    CHECK(report.shared_vocab_fraction >= 0.0);
    CHECK(report.shared_vocab_fraction <= 1.0);
    CHECK(report.batched_report.pass_count <= report.batched_report.merges_made);
}

}  // TEST_SUITE
