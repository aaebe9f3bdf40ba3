#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "batchtok/errors.hpp"
#include "batchtok/histogram.hpp"
#include "batchtok/ingest.hpp"
#include "corpus_gen.hpp"
#include "rng.hpp"

using namespace batchtok;

namespace {

ChunkHistogram make(std::initializer_list<std::pair<const char*, std::uint64_t>> entries,
                    std::string pattern = "gpt4") {
    ChunkHistogram h(std::move(pattern));
    for (const auto& [chunk, count] : entries) h.add(chunk, count);
    return h;
}

ChunkHistogram random_histogram(std::uint64_t seed, std::size_t max_entries = 40) {
    testing::Rng rng(seed);
    ChunkHistogram h("gpt4");
    const std::size_t n = rng.below(max_entries + 1);
    for (std::size_t i = 0; i < n; ++i) {
        h.add(testing::random_utf8(rng.next(), 8), rng.between(1, 50));
    }
    return h;
}

std::string csv_of(const ChunkHistogram& h) {
    std::ostringstream out;
    save_csv(h, out);
    return out.str();
}

ChunkHistogram csv_back(const std::string& text) {
    std::istringstream in(text);
    return load_csv(in);
}

}  // namespace

TEST_SUITE("histogram") {

TEST_CASE("build_histogram counts chunks across documents") {
    const auto h = build_histogram({"aa aa"}, SplitPattern::gpt4());
    CHECK(h.count("aa") == 1);
    CHECK(h.count(" aa") == 1);
    CHECK(h.total() == 2);
    CHECK(h.unique() == 2);

    CHECK(build_histogram({}, SplitPattern::gpt4()).total() == 0);

    const auto two_docs = build_histogram({"x", "x"}, SplitPattern::gpt4());
    CHECK(two_docs.count("x") == 2);
    CHECK(two_docs.unique() == 1);
}

TEST_CASE("histogram conservation: total equals the sum of split lengths") {
    std::vector<std::string> docs;
    std::size_t expected = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        docs.push_back(testing::random_utf8(seed, 80));
        expected += split_text(docs.back(), SplitPattern::gpt4()).size();
    }
    CHECK(build_histogram(docs, SplitPattern::gpt4()).total() == expected);
}

TEST_CASE("merge_histograms sums counts") {
    const auto merged = merge_histograms(make({{"a", 1}}), make({{"a", 2}, {"b", 1}}));
    CHECK(merged.count("a") == 3);
    CHECK(merged.count("b") == 1);
    CHECK(merged.total() == 4);

    const auto h = make({{"x", 5}, {"y", 2}});
    CHECK(merge_histograms(h, ChunkHistogram("gpt4")) == h);
}

TEST_CASE("merge_histograms is commutative and associative") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto a = random_histogram(seed * 3 + 0);
        const auto b = random_histogram(seed * 3 + 1);
        const auto c = random_histogram(seed * 3 + 2);
        CHECK(merge_histograms(a, b) == merge_histograms(b, a));
        CHECK(merge_histograms(merge_histograms(a, b), c) == merge_histograms(a, merge_histograms(b, c)));
    }
}

TEST_CASE("merge_histograms rejects mismatched patterns") {
    CHECK_THROWS_AS(merge_histograms(make({{"a", 1}}), make({{"a", 1}}, "other")), ConfigError);
}

TEST_CASE("apply_freq_cutoff keeps counts >= cutoff") {
    const auto h = make({{"a", 9}, {"b", 10}});
    const auto cut = apply_freq_cutoff(h, 10);
    CHECK(cut.unique() == 1);
    CHECK(cut.count("b") == 10);

    CHECK(apply_freq_cutoff(h, 1) == h);
    CHECK_THROWS_AS(apply_freq_cutoff(h, 0), ConfigError);
}

TEST_CASE("apply_freq_cutoff is idempotent") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto h = random_histogram(seed);
        for (std::uint64_t cutoff : {2, 5, 17}) {
            const auto once = apply_freq_cutoff(h, cutoff);
            CHECK(apply_freq_cutoff(once, cutoff) == once);
        }
    }
}

TEST_CASE("cutoff 10 shrinks a natural-text histogram by more than half") {
    const auto h = build_histogram({testing::synth_english(11, 10u << 20)}, SplitPattern::gpt4());
    const auto cut = apply_freq_cutoff(h, 10);
    CHECK(cut.unique() * 2 < h.unique());
    // the surviving chunks still carry most of the corpus mass
    CHECK(cut.total() * 2 > h.total());
}

TEST_CASE("extract_stop_list returns the most common chunks in order") {
    CHECK(extract_stop_list(make({{"a", 1}}), 0).empty());

    const auto h = make({{"b", 2}, {"a", 2}, {"c", 1}});
    CHECK(extract_stop_list(h, 3) == std::vector<std::string>{"a", "b", "c"});
    CHECK_THROWS_AS(extract_stop_list(h, 4), ConfigError);
}

TEST_CASE("an English corpus puts \" the\" and \" in\" near the top") {
    const auto h = build_histogram({testing::synth_english(3, 512 << 10)}, SplitPattern::gpt4());
    const auto stops = extract_stop_list(h, 30);
    CHECK(std::find(stops.begin(), stops.end(), " the") != stops.end());
    CHECK(std::find(stops.begin(), stops.end(), " in") != stops.end());
}

TEST_CASE("compute_stats basic arithmetic") {
    const auto stats = compute_stats(make({{"a", 3}, {"b", 1}}), 1);
    CHECK(stats.total_chunks == 4);
    CHECK(stats.unique_chunks == 2);
    CHECK(stats.unique_fraction == doctest::Approx(0.5));
    CHECK(stats.top_k_share == doctest::Approx(0.75));
}

TEST_CASE("compute_stats on a uniform histogram") {
    ChunkHistogram h("gpt4");
    for (char c = 'a'; c < 'a' + 8; ++c) h.add(std::string(1, c), 1);
    const auto stats = compute_stats(h, 8);
    CHECK(stats.top_k_share == doctest::Approx(1.0));
    CHECK(stats.frequency_histogram.at(1) == 8);
}

TEST_CASE("top_k_share grows with k") {
    const auto h = build_histogram({testing::synth_english(5, 64 << 10)}, SplitPattern::gpt4());
    double prev = 0.0;
    for (std::uint64_t k : {1, 10, 100, 1000}) {
        const auto stats = compute_stats(h, std::min(k, h.unique()));
        CHECK(stats.top_k_share >= prev);
        prev = stats.top_k_share;
    }
    CHECK(prev <= 1.0);
}

TEST_CASE("stats frequency buckets collapse at the tail") {
    const auto h = make({{"a", 1}, {"b", 2}, {"c", 99}, {"d", 100}});
    const auto stats = compute_stats(h, 1, 3);
    CHECK(stats.frequency_histogram.at(1) == 1);
    CHECK(stats.frequency_histogram.at(2) == 1);
    CHECK(stats.frequency_histogram.at(3) == 2);  // tail bucket
}

TEST_CASE("csv round trip preserves awkward chunks") {
    const auto comma = make({{"a,b", 3}});
    CHECK(csv_back(csv_of(comma)) == comma);

    const auto newline = make({{"a\nb", 2}, {"quote\"field", 7}, {"\r\n", 1}});
    CHECK(csv_back(csv_of(newline)) == newline);

    const ChunkHistogram empty("gpt4");
    CHECK(csv_of(empty) == "chunk,count\n");
    CHECK(csv_back(csv_of(empty)) == empty);
}

TEST_CASE("csv round trip on random UTF-8 histograms") {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        auto h = random_histogram(seed);
        h.add(",leading", 4);
        h.add("trailing\n", 2);
        h.add("\"", 9);
        CHECK(csv_back(csv_of(h)) == h);
    }
}

TEST_CASE("csv save rejects chunks that are not valid UTF-8") {
    const auto h = make({{"\xff\xfe", 1}});
    std::ostringstream out;
    CHECK_THROWS_AS(save_csv(h, out), ConfigError);
}

TEST_CASE("csv load reports malformed rows with line numbers") {
    auto load = [](const char* text) { return csv_back(text); };

    CHECK_THROWS_AS(load("wrong,header\n"), ParseError);
    CHECK_THROWS_AS(load("chunk,count\nno-comma\n"), ParseError);
    CHECK_THROWS_AS(load("chunk,count\na,notanumber\n"), ParseError);
    CHECK_THROWS_AS(load("chunk,count\na,0\n"), ParseError);
    CHECK_THROWS_AS(load("chunk,count\na,-3\n"), ParseError);
    CHECK_THROWS_AS(load("chunk,count\n\"unterminated,3\n"), ParseError);

    try {
        load("chunk,count\nok,3\nbad,x\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("ingest shards merge to the single-threaded result") {
    std::vector<std::string> docs;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        docs.push_back(testing::synth_english(seed, 4 << 10));
    }
    const auto expected = build_histogram(docs, SplitPattern::gpt4());

    ChunkHistogram sharded("gpt4");
    for (const auto& doc : docs) {
        sharded = merge_histograms(sharded, build_histogram({doc}, SplitPattern::gpt4()));
    }
    CHECK(sharded == expected);
}

}  // TEST_SUITE
