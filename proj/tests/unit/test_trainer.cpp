#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "batchtok/errors.hpp"
#include "batchtok/trainer.hpp"
#include "corpus_gen.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace batchtok;

namespace {

TokenSequenceSet seqs_of(std::initializer_list<std::pair<std::vector<TokenId>, std::uint64_t>> items) {
    TokenSequenceSet s;
    for (const auto& [tokens, freq] : items) s.items.push_back({tokens, freq});
    return s;
}

PairStats stats_of(std::initializer_list<std::pair<TokenPair, std::uint64_t>> entries) {
    PairStats s;
    for (const auto& [pair, count] : entries) s.counts[PairStats::pack(pair.first, pair.second)] = count;
    return s;
}

ChunkHistogram histogram_of_text(const std::string& text) {
    return build_histogram({text}, SplitPattern::gpt4());
}

TrainConfig config(std::uint32_t vocab_size, CountingMode mode = CountingMode::NonOverlapping) {
    TrainConfig c;
    c.vocab_size = vocab_size;
    c.counting_mode = mode;
    return c;
}

std::string random_corpus(std::uint64_t seed, std::size_t bytes) {
    switch (seed % 3) {
        case 0: return testing::synth_english(seed, bytes);
        case 1: return testing::random_runs_text(seed, bytes);
        default: return testing::random_utf8(seed, bytes / 2);
    }
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("get_stats counts identical runs per mode") {
    const auto aaaaa = seqs_of({{{97, 97, 97, 97, 97}, 1}});
    CHECK(get_stats(aaaaa, CountingMode::NonOverlapping).count(97, 97) == 2);
    CHECK(get_stats(aaaaa, CountingMode::Overcount).count(97, 97) == 4);
}

TEST_CASE("get_stats weights pairs by chunk frequency") {
    const auto her = seqs_of({{{104, 101, 114}, 3}});
    const auto stats = get_stats(her, CountingMode::NonOverlapping);
    CHECK(stats.count(104, 101) == 3);
    CHECK(stats.count(101, 114) == 3);
    CHECK(stats.counts.size() == 2);

    const auto oracle = testing::oracle_pair_counts(her, CountingMode::NonOverlapping);
    CHECK(oracle.at({104, 101}) == 3);
    CHECK(oracle.at({101, 114}) == 3);
}

TEST_CASE("get_stats matches the run-walking oracle on random sequences") {
    testing::Rng rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
        TokenSequenceSet seqs;
        const std::size_t n_items = rng.between(1, 4);
        for (std::size_t k = 0; k < n_items; ++k) {
            TokenSequenceSet::Item item;
            item.freq = rng.between(1, 9);
            const std::size_t len = rng.below(51);
            for (std::size_t i = 0; i < len; ++i) {
                item.tokens.push_back(static_cast<TokenId>(rng.below(4)));
            }
            seqs.items.push_back(std::move(item));
        }
        for (const CountingMode mode : {CountingMode::NonOverlapping, CountingMode::Overcount}) {
            const auto got = get_stats(seqs, mode);
            const auto expected = testing::oracle_pair_counts(seqs, mode);
            REQUIRE(got.counts.size() == expected.size());
            for (const auto& [pair, count] : expected) {
                REQUIRE(got.count(pair.first, pair.second) == count);
            }
        }
    }
}

TEST_CASE("get_stats is identical across worker counts") {
    const auto h = histogram_of_text(testing::synth_english(21, 64 << 10));
    const auto prep = prepare_sequences(h, config(512));
    const auto one = get_stats(prep.sequences, CountingMode::NonOverlapping, 1);
    const auto four = get_stats(prep.sequences, CountingMode::NonOverlapping, 4);
    CHECK(one.counts == four.counts);
}

TEST_CASE("batch_search_limit applies all three caps and floors at one") {
    TrainConfig c = config(50304);

    CHECK(batch_search_limit(1, 256, c) == 1);          // floor division would give 0
    CHECK(batch_search_limit(10000, 256, c) == 256);    // current vocabulary size
    c.max_batch_size = 1;
    CHECK(batch_search_limit(10000, 256, c) == 1);      // hard cap
    c.max_batch_size = kUnboundedBatch;
    c.cap_divisor = 3;
    CHECK(batch_search_limit(100, 2000, c) == 33);      // merges_remaining / cap_divisor
}

TEST_CASE("select_safe_batch skips pairs whose tokens switch position") {
    // (e,r) then (t,h) merge; (h,e) conflicts with both
    const auto stats = stats_of({{{101, 114}, 30}, {{116, 104}, 20}, {{104, 101}, 10}});
    const auto batch = select_safe_batch(stats, 3, 256);
    REQUIRE(batch.merges.size() == 2);
    CHECK(batch.merges[0].pair == TokenPair{101, 114});
    CHECK(batch.merges[0].new_token == 256);
    CHECK(batch.merges[1].pair == TokenPair{116, 104});
    CHECK(batch.merges[1].new_token == 257);
    CHECK(batch.skipped() == std::vector<TokenPair>{{104, 101}});
    CHECK(testing::replay_safety_violations(batch) == 0);
}

TEST_CASE("select_safe_batch accepts a token recurring in the same position") {
    const auto stats = stats_of({{{101, 114}, 30}, {{116, 104}, 20}, {{101, 110}, 10}});
    const auto batch = select_safe_batch(stats, 3, 256);
    REQUIRE(batch.merges.size() == 3);
    CHECK(batch.merges[2].pair == TokenPair{101, 110});
}

TEST_CASE("a repeated-token pair blocks every other pair sharing its token") {
    const auto stats = stats_of({{{97, 97}, 30}, {{97, 98}, 20}, {{99, 97}, 10}});
    const auto batch = select_safe_batch(stats, 3, 500);
    REQUIRE(batch.merges.size() == 1);
    CHECK(batch.merges[0].pair == TokenPair{97, 97});
    CHECK(batch.skipped().size() == 2);
    CHECK(testing::replay_safety_violations(batch) == 0);
}

TEST_CASE("skipped pairs still poison later candidates") {
    const auto stats = stats_of({{{1, 2}, 40}, {{2, 3}, 30}, {{9, 2}, 20}});
    const auto batch = select_safe_batch(stats, 3, 256);
    REQUIRE(batch.merges.size() == 1);
    CHECK(batch.merges[0].pair == TokenPair{1, 2});
    // (2,3) conflicts with the merged (1,2); (9,2) conflicts only with the
    // *skipped* (2,3), whose tokens entered the seen sets anyway
    CHECK(batch.skipped().size() == 2);
}

TEST_CASE("naive selection stops at the first shared token") {
    const auto stats = stats_of({{{101, 114}, 30}, {{116, 104}, 20}, {{104, 101}, 10}, {{101, 110}, 5}});
    const auto batch = select_safe_batch(stats, 4, 256, /*naive=*/true);
    REQUIRE(batch.merges.size() == 2);
    CHECK(batch.merges[0].pair == TokenPair{101, 114});
    CHECK(batch.merges[1].pair == TokenPair{116, 104});
    CHECK(testing::replay_safety_violations(batch) == 0);
}

TEST_CASE("ties break toward the lexicographically smaller pair") {
    const auto stats = stats_of({{{5, 9}, 10}, {{5, 2}, 10}, {{4, 20}, 10}});
    const auto batch = select_safe_batch(stats, 1, 256);
    REQUIRE(batch.merges.size() == 1);
    CHECK(batch.merges[0].pair == TokenPair{4, 20});
}

TEST_CASE("merge_batch replaces pairs left to right") {
    SafeBatch batch;
    batch.merges.push_back({{101, 114}, 256});

    auto her = seqs_of({{{104, 101, 114}, 1}});
    merge_batch(her, batch);
    CHECK(her.items[0].tokens == std::vector<TokenId>{104, 256});

    SafeBatch two;
    two.merges.push_back({{101, 114}, 256});
    two.merges.push_back({{116, 104}, 257});
    auto there = seqs_of({{{116, 104, 101, 114, 101}, 1}});
    merge_batch(there, two);
    // both merges land in a single pass
    const auto expected = testing::oracle_apply_batch_fixpoint({116, 104, 101, 114, 101}, two.merges, {0, 1});
    CHECK(there.items[0].tokens == expected);
    CHECK(there.items[0].tokens == std::vector<TokenId>{257, 256, 101});

    SafeBatch identical;
    identical.merges.push_back({{97, 97}, 300});
    auto aaaa = seqs_of({{{97, 97, 97, 97}, 1}});
    merge_batch(aaaa, identical);
    CHECK(aaaa.items[0].tokens == std::vector<TokenId>{300, 300});
}

TEST_CASE("merge_batch rejects pairs referencing undefined tokens") {
    SafeBatch batch;
    batch.merges.push_back({{500, 10}, 400});  // 500 >= 400
    auto seqs = seqs_of({{{1, 2}, 1}});
    CHECK_THROWS_AS(merge_batch(seqs, batch), std::logic_error);
}

TEST_CASE("prepare_sequences applies cutoff, stop list and byte conversion") {
    ChunkHistogram h("gpt4");
    h.add("a", 1);
    h.add("b", 5);

    TrainConfig c = config(300);
    c.freq_cutoff = 2;
    const auto prep = prepare_sequences(h, c);
    REQUIRE(prep.sequences.items.size() == 1);
    CHECK(prep.sequences.items[0].tokens == std::vector<TokenId>{98});
    CHECK(prep.sequences.items[0].freq == 5);
    CHECK(prep.stop_chunks.empty());

    c.freq_cutoff = 100;
    CHECK_THROWS_AS(prepare_sequences(h, c), TrainError);

    TrainConfig wide = config(600);
    wide.stop_list_size = 50;
    CHECK_THROWS_AS(prepare_sequences(h, wide), ConfigError);
}

TEST_CASE("stop chunks keep shaping merge statistics as byte sequences") {
    const auto h = histogram_of_text(testing::synth_english(17, 128 << 10));
    TrainConfig c = config(640);
    c.stop_list_size = 10;
    const auto prep = prepare_sequences(h, c);

    REQUIRE(prep.stop_chunks.size() == 10);
    CHECK(std::find(prep.stop_chunks.begin(), prep.stop_chunks.end(), " the") != prep.stop_chunks.end());

    // every chunk, stop chunks included, is plain bytes
    const auto cut = apply_freq_cutoff(h, c.freq_cutoff);
    CHECK(prep.sequences.items.size() == cut.unique());
    for (const auto& item : prep.sequences.items) {
        for (TokenId id : item.tokens) CHECK(id < kBaseVocabSize);
    }
}

TEST_CASE("config validation catches inconsistent parameters") {
    CHECK_THROWS_AS(config(255).validate(), ConfigError);

    TrainConfig c = config(300);
    c.stop_list_size = 60;
    CHECK_THROWS_AS(c.validate(), ConfigError);  // 256 + 60 > 300
    c.stop_list_size = 0;
    c.cap_divisor = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("training the classic tiny corpus serially starts with the a-a merge") {
    const auto h = histogram_of_text("aaabdaaabac");
    TrainConfig c = config(259);
    c.max_batch_size = 1;

    const auto result = train(h, c);
    REQUIRE(result.model.merges().size() == 3);
    CHECK(result.model.merges().entries[0].pair == TokenPair{97, 97});

    const auto serial = train_serial_reference(h, c);
    CHECK(result.model.merges() == serial);
    for (std::uint32_t size : result.report.batch_sizes) CHECK(size == 1);
}

TEST_CASE("zero merge budget trains an empty table") {
    const auto h = histogram_of_text("some text");
    const auto result = train(h, config(256));
    CHECK(result.model.merges().size() == 0);
    CHECK(result.report.pass_count == 0);
    CHECK(train_serial_reference(h, config(256)).entries.empty());
}

TEST_CASE("max_batch_size=1 reproduces the serial reference on random corpora") {
    for (std::uint64_t seed = 0; seed < 18; ++seed) {
        const auto h = histogram_of_text(random_corpus(seed, 6 << 10));
        for (const CountingMode mode : {CountingMode::NonOverlapping, CountingMode::Overcount}) {
            TrainConfig c = config(256 + 8 + static_cast<std::uint32_t>(seed % 40), mode);
            c.max_batch_size = 1;
            CAPTURE(seed);
            CAPTURE(mode == CountingMode::Overcount);
            const auto batched = train(h, c);
            const auto serial = train_serial_reference(h, c);
            REQUIRE(batched.model.merges() == serial);
        }
    }
}

TEST_CASE("report accounting adds up") {
    const auto h = histogram_of_text(testing::synth_english(31, 96 << 10));
    const auto result = train(h, config(700));
    const auto& report = result.report;

    CHECK(report.merges_made == 700 - 256);
    CHECK(report.pass_count == report.batch_sizes.size());
    std::uint64_t sum = 0;
    for (std::uint32_t s : report.batch_sizes) sum += s;
    CHECK(sum == report.merges_made);
    CHECK(report.merges_remaining.back() == 0);
    CHECK(!report.exhausted);
    CHECK(report.batches.size() == report.pass_count);
}

TEST_CASE("training more merges than the corpus supports returns a partial model") {
    const auto h = histogram_of_text("ab");
    const auto result = train(h, config(400));
    CHECK(result.report.exhausted);
    CHECK(!result.report.warning.empty());
    CHECK(result.model.merges().size() == 1);  // only (a,b) exists
    CHECK(result.model.merges().entries[0].pair == TokenPair{97, 98});

    const auto serial = train_serial_reference(h, config(400));
    CHECK(serial == result.model.merges());
}

TEST_CASE("every batch of a real training run replays safely") {
    const auto h = histogram_of_text(testing::synth_english(47, 64 << 10));
    const auto result = train(h, config(512));
    REQUIRE(!result.report.batches.empty());
    bool saw_skips = false;
    for (const auto& batch : result.report.batches) {
        CHECK(testing::replay_safety_violations(batch) == 0);
        saw_skips = saw_skips || !batch.skipped().empty();
    }
    CHECK(saw_skips);  // conflicts actually occurred at this scale
}

TEST_CASE("merged pairs vanish from the next stats pass") {
    const auto h = histogram_of_text(testing::synth_english(53, 32 << 10));
    auto prep = prepare_sequences(h, config(512));
    auto& seqs = prep.sequences;

    TokenId next_id = kBaseVocabSize;
    for (int round = 0; round < 6; ++round) {
        const auto stats = get_stats(seqs, CountingMode::NonOverlapping);
        if (stats.empty()) break;
        const auto batch = select_safe_batch(stats, 64, next_id);
        const std::uint64_t before = seqs.total_tokens();
        merge_batch(seqs, batch);
        CHECK(seqs.total_tokens() < before);  // monotone shrinkage

        const auto after = get_stats(seqs, CountingMode::NonOverlapping);
        for (const auto& e : batch.merges) {
            CHECK(after.count(e.pair.first, e.pair.second) == 0);
        }
        next_id += static_cast<TokenId>(batch.merges.size());
    }
}

TEST_CASE("overcount training equals a manual loop with separate passes") {
    const auto h = histogram_of_text(testing::synth_english(61, 32 << 10));
    const TrainConfig c = config(420, CountingMode::Overcount);

    const auto fused = train(h, c);

    // same loop, but stats and merge always run as separate passes
    auto prep = prepare_sequences(h, c);
    auto& seqs = prep.sequences;
    std::uint32_t remaining = c.merge_budget();
    TokenId next_id = kBaseVocabSize;
    MergeTable table;
    while (remaining > 0) {
        const auto stats = get_stats(seqs, CountingMode::Overcount);
        if (stats.empty()) break;
        const auto batch = select_safe_batch(stats, batch_search_limit(remaining, next_id, c), next_id);
        table.entries.insert(table.entries.end(), batch.merges.begin(), batch.merges.end());
        next_id += static_cast<TokenId>(batch.merges.size());
        remaining -= static_cast<std::uint32_t>(batch.merges.size());
        if (remaining > 0) merge_batch(seqs, batch);
    }
    CHECK(fused.model.merges() == table);
}

TEST_CASE("worker count does not change the trained model") {
    const auto h = histogram_of_text(testing::synth_english(71, 64 << 10));
    const auto one = train(h, config(600), 1);
    const auto three = train(h, config(600), 3);
    CHECK(one.model == three.model);
    CHECK(one.report.batch_sizes == three.report.batch_sizes);
}

TEST_CASE("naive batching produces smaller batches than position-sensitive") {
    const auto h = histogram_of_text(testing::synth_english(83, 64 << 10));
    TrainConfig naive = config(600);
    naive.naive_batching = true;
    const auto naive_result = train(h, naive);
    const auto safe_result = train(h, config(600));
    CHECK(naive_result.report.mean_batch_size() <= safe_result.report.mean_batch_size());
    for (const auto& batch : naive_result.report.batches) {
        CHECK(testing::replay_safety_violations(batch) == 0);
    }
}

TEST_CASE("safe batches apply order-independently") {
    testing::Rng rng(0xBEEF);
    for (int trial = 0; trial < 60; ++trial) {
        // batch selected from one sequence's stats, applied to another
        TokenSequenceSet source;
        source.items.push_back({{}, 1});
        for (int i = 0; i < 40; ++i) source.items[0].tokens.push_back(static_cast<TokenId>(rng.below(5)));
        const auto stats = get_stats(source, CountingMode::NonOverlapping);
        if (stats.empty()) continue;
        const auto batch = select_safe_batch(stats, static_cast<std::uint32_t>(rng.between(1, 8)), 100);

        std::vector<TokenId> target;
        for (int i = 0; i < 40; ++i) target.push_back(static_cast<TokenId>(rng.below(5)));

        auto single = seqs_of({{target, 1}});
        merge_batch(single, batch);

        std::vector<std::size_t> order(batch.merges.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (int perm = 0; perm < 3; ++perm) {
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[rng.below(i)]);
            }
            CHECK(testing::oracle_apply_batch_fixpoint(target, batch.merges, order) == single.items[0].tokens);
        }
    }
}

}  // TEST_SUITE
