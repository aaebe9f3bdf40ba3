#pragma once

#include <cstdint>
#include <string>

namespace batchtok::testing {

// Deterministic English-like prose: Zipf-distributed words built from
// syllables, sentence casing, punctuation and paragraph breaks. Same seed
// and size always produce the same text.
std::string synth_english(std::uint64_t seed, std::size_t target_bytes);

// Random text over a tiny alphabet with frequent repeated-character runs;
// stresses the run-counting rules.
std::string random_runs_text(std::uint64_t seed, std::size_t target_bytes, unsigned alphabet = 4);

// Random valid UTF-8 mixing ASCII, multibyte scripts, emoji and combining
// marks.
std::string random_utf8(std::uint64_t seed, std::size_t max_codepoints);

}  // namespace batchtok::testing
