#pragma once

#include <string>
#include <vector>

#include "batchtok/histogram.hpp"
#include "batchtok/split.hpp"

namespace batchtok {

// How ingested files map to documents.
enum class DocDelimiting {
    WholeFile,  // one document per file
    PerLine,    // one document per line
};

// Reads a whole file as bytes. Throws IoError.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Expands files and directories (walked recursively) into a sorted list of
// regular file paths. Missing paths raise IoError.
std::vector<std::string> expand_inputs(const std::vector<std::string>& paths);

// Builds a chunk histogram over the given files. With threads > 1 the files'
// documents are sharded across workers and the per-worker histograms merged;
// the result is identical to a single-threaded run.
ChunkHistogram ingest_files(const std::vector<std::string>& paths, const SplitPattern& pattern,
                            DocDelimiting delimiting, unsigned threads = 1);

}  // namespace batchtok
