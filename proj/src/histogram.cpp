#include "batchtok/histogram.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "batchtok/errors.hpp"
#include "batchtok/unicode.hpp"

namespace batchtok {

void ChunkHistogram::add(std::string_view chunk, std::uint64_t n) {
    if (n == 0) return;
    entries_[std::string(chunk)] += n;
    total_ += n;
}

std::uint64_t ChunkHistogram::count(std::string_view chunk) const {
    auto it = entries_.find(std::string(chunk));
    return it == entries_.end() ? 0 : it->second;
}

std::vector<std::pair<std::string, std::uint64_t>> ChunkHistogram::sorted_entries() const {
    std::vector<std::pair<std::string, std::uint64_t>> rows(entries_.begin(), entries_.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return rows;
}

ChunkHistogram build_histogram(const std::vector<std::string>& documents, const SplitPattern& pattern) {
    ChunkHistogram h(pattern.name);
    for (const auto& doc : documents) {
        for (auto& chunk : split_text(doc, pattern)) {
            h.add(chunk);
        }
    }
    return h;
}

ChunkHistogram merge_histograms(const ChunkHistogram& a, const ChunkHistogram& b) {
    if (a.split_pattern_name() != b.split_pattern_name()) {
        throw ConfigError("cannot merge histograms built with different split patterns (\"" +
                          a.split_pattern_name() + "\" vs \"" + b.split_pattern_name() + "\")");
    }
    ChunkHistogram out = a;
    for (const auto& [chunk, count] : b.entries()) {
        out.add(chunk, count);
    }
    return out;
}

ChunkHistogram apply_freq_cutoff(const ChunkHistogram& h, std::uint64_t cutoff) {
    if (cutoff < 1) throw ConfigError("freq_cutoff must be >= 1");
    if (cutoff == 1) return h;
    ChunkHistogram out(h.split_pattern_name());
    for (const auto& [chunk, count] : h.entries()) {
        if (count >= cutoff) out.add(chunk, count);
    }
    return out;
}

std::vector<std::string> extract_stop_list(const ChunkHistogram& h, std::uint64_t n) {
    if (n > h.unique()) {
        throw ConfigError("stop list size " + std::to_string(n) + " exceeds unique chunk count " +
                          std::to_string(h.unique()));
    }
    auto rows = h.sorted_entries();
    std::vector<std::string> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(std::move(rows[i].first));
    return out;
}

CorpusStats compute_stats(const ChunkHistogram& h, std::uint64_t top_k, std::uint64_t tail_bucket_start) {
    CorpusStats s;
    s.total_chunks = h.total();
    s.unique_chunks = h.unique();
    s.unique_fraction = s.total_chunks ? static_cast<double>(s.unique_chunks) / static_cast<double>(s.total_chunks) : 0.0;
    s.tail_bucket_start = tail_bucket_start;
    s.top_k = std::min(top_k, s.unique_chunks);

    auto rows = h.sorted_entries();
    std::uint64_t top_sum = 0;
    for (std::uint64_t i = 0; i < s.top_k; ++i) top_sum += rows[i].second;
    s.top_k_share = s.total_chunks ? static_cast<double>(top_sum) / static_cast<double>(s.total_chunks) : 0.0;

    for (const auto& [chunk, count] : rows) {
        s.frequency_histogram[std::min<std::uint64_t>(count, tail_bucket_start)] += 1;
    }
    return s;
}

namespace {

bool needs_quoting(std::string_view field) {
    return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_field(std::ostream& out, std::string_view field) {
    if (!needs_quoting(field)) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << "\"\"";
        else out << c;
    }
    out << '"';
}

}  // namespace

void save_csv(const ChunkHistogram& h, std::ostream& out) {
    out << "chunk,count\n";
    for (const auto& [chunk, count] : h.sorted_entries()) {
        if (!is_valid_utf8(chunk)) {
            throw ConfigError("histogram contains a chunk that is not valid UTF-8; refusing to write CSV");
        }
        write_field(out, chunk);
        out << ',' << count << '\n';
    }
}

void save_csv(const ChunkHistogram& h, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    save_csv(h, out);
    if (!out) throw IoError("failed writing " + path);
}

namespace {

// One CSV record: possibly quoted chunk field, comma, bare count field.
// `line_no` is advanced past any newlines embedded in a quoted chunk.
bool read_record(std::istream& in, std::size_t& line_no, std::string& chunk, std::uint64_t& count) {
    int c = in.get();
    if (c == std::istream::traits_type::eof()) return false;
    const std::size_t record_line = line_no;

    chunk.clear();
    if (c == '"') {
        for (;;) {
            c = in.get();
            if (c == std::istream::traits_type::eof()) {
                throw ParseError("unterminated quoted field", record_line);
            }
            if (c == '"') {
                const int next = in.get();
                if (next == '"') {
                    chunk.push_back('"');
                    continue;
                }
                c = next;
                break;
            }
            if (c == '\n') ++line_no;
            chunk.push_back(static_cast<char>(c));
        }
        if (c != ',') throw ParseError("expected ',' after quoted chunk field", record_line);
    } else {
        while (c != ',' && c != '\n' && c != std::istream::traits_type::eof()) {
            chunk.push_back(static_cast<char>(c));
            c = in.get();
        }
        if (c != ',') throw ParseError("expected 2 columns", record_line);
    }

    std::string count_field;
    c = in.get();
    while (c != '\n' && c != std::istream::traits_type::eof()) {
        count_field.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (c == '\n') ++line_no;
    if (!count_field.empty() && count_field.back() == '\r') count_field.pop_back();

    if (count_field.empty() || count_field.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError("count is not a non-negative integer: \"" + count_field + "\"", record_line);
    }
    try {
        count = std::stoull(count_field);
    } catch (const std::out_of_range&) {
        throw ParseError("count out of range: \"" + count_field + "\"", record_line);
    }
    if (count < 1) throw ParseError("count must be >= 1", record_line);
    return true;
}

}  // namespace

ChunkHistogram load_csv(std::istream& in, std::string pattern_name) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError("missing header row", 1);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != "chunk,count") throw ParseError("expected header \"chunk,count\", got \"" + header + "\"", 1);

    ChunkHistogram h(std::move(pattern_name));
    std::size_t line_no = 2;
    std::string chunk;
    std::uint64_t count = 0;
    while (read_record(in, line_no, chunk, count)) {
        h.add(chunk, count);
    }
    return h;
}

ChunkHistogram load_csv(const std::string& path, std::string pattern_name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return load_csv(in, std::move(pattern_name));
}

}  // namespace batchtok
