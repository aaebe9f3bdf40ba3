#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace batchtok {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments (bad pattern source, out-of-range
// parameter, incompatible flag combination). CLI maps these to exit code 1.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input data (CSV rows, model files, token streams). Carries a
// 1-based line number when one is known. CLI maps these to exit code 2.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line_no = 0)
        : Error(line_no ? "line " + std::to_string(line_no) + ": " + what : what), line(line_no) {}

    std::size_t line;
};

// Training cannot proceed (e.g. empty histogram after filtering).
struct TrainError : Error {
    using Error::Error;
};

// Token stream cannot be decoded.
struct DecodeError : Error {
    using Error::Error;
};

// Filesystem failures.
struct IoError : Error {
    using Error::Error;
};

}  // namespace batchtok
