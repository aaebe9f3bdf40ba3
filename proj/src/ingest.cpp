#include "batchtok/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "batchtok/errors.hpp"

namespace fs = std::filesystem;

namespace batchtok {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading " + path);
    return std::move(buf).str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("failed writing " + path);
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& paths) {
    std::vector<std::string> files;
    for (const auto& p : paths) {
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            for (const auto& entry : fs::recursive_directory_iterator(p)) {
                if (entry.is_regular_file()) files.push_back(entry.path().string());
            }
        } else if (fs::is_regular_file(p, ec)) {
            files.push_back(p);
        } else {
            throw IoError("input not found: " + p);
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

namespace {

// PerLine treats each line (without its terminator) as one document; blank
// lines contribute nothing.
std::vector<std::string> split_documents(std::string contents, DocDelimiting delimiting) {
    if (delimiting == DocDelimiting::WholeFile) {
        return {std::move(contents)};
    }
    std::vector<std::string> docs;
    std::size_t start = 0;
    while (start < contents.size()) {
        std::size_t nl = contents.find('\n', start);
        if (nl == std::string::npos) nl = contents.size();
        std::size_t end = nl;
        if (end > start && contents[end - 1] == '\r') --end;
        if (end > start) docs.push_back(contents.substr(start, end - start));
        start = nl + 1;
    }
    return docs;
}

}  // namespace

ChunkHistogram ingest_files(const std::vector<std::string>& paths, const SplitPattern& pattern,
                            DocDelimiting delimiting, unsigned threads) {
    std::vector<std::string> documents;
    for (const auto& path : expand_inputs(paths)) {
        for (auto& doc : split_documents(read_file(path), delimiting)) {
            documents.push_back(std::move(doc));
        }
    }

    if (threads <= 1 || documents.size() < 2) {
        return build_histogram(documents, pattern);
    }

    const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(documents.size()));
    std::vector<ChunkHistogram> shards(workers);
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t per = (documents.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * per;
        const std::size_t end = std::min(documents.size(), begin + per);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end, w] {
            try {
                std::vector<std::string> slice(documents.begin() + static_cast<std::ptrdiff_t>(begin),
                                               documents.begin() + static_cast<std::ptrdiff_t>(end));
                shards[w] = build_histogram(slice, pattern);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    ChunkHistogram merged = std::move(shards[0]);
    for (std::size_t i = 1; i < shards.size(); ++i) {
        if (shards[i].empty() && shards[i].split_pattern_name().empty()) continue;
        merged = merge_histograms(merged, shards[i]);
    }
    return merged;
}

}  // namespace batchtok
