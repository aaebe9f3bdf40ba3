#include "batchtok/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "batchtok/errors.hpp"

namespace batchtok {

namespace {

constexpr std::string_view kHeader = "batchtok model v1";

std::string quote(std::string_view raw) {
    std::string out = "\"";
    for (unsigned char c : raw) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20 || c == 0x7F) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\x%02x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    out += '"';
    return out;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string unquote(std::string_view field, std::size_t line_no) {
    if (field.size() < 2 || field.front() != '"' || field.back() != '"') {
        throw ParseError("expected a double-quoted string, got \"" + std::string(field) + "\"", line_no);
    }
    const std::string_view body = field.substr(1, field.size() - 2);
    std::string out;
    std::size_t i = 0;
    while (i < body.size()) {
        const char c = body[i];
        if (c == '"') throw ParseError("unescaped quote inside quoted string", line_no);
        if (c != '\\') {
            out += c;
            ++i;
            continue;
        }
        if (++i >= body.size()) throw ParseError("dangling escape", line_no);
        const char e = body[i++];
        switch (e) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            case 't': out += '\t'; break;
            case 'x': {
                if (i + 2 > body.size()) throw ParseError("truncated \\x escape", line_no);
                const int hi = hex_digit(body[i]);
                const int lo = hex_digit(body[i + 1]);
                if (hi < 0 || lo < 0) throw ParseError("invalid \\x escape", line_no);
                out += static_cast<char>(hi * 16 + lo);
                i += 2;
                break;
            }
            default:
                throw ParseError(std::string("unknown escape \\") + e, line_no);
        }
    }
    return out;
}

std::string next_line(std::istream& in, std::size_t& line_no, const char* what) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(std::string("unexpected end of file, expected ") + what, line_no + 1);
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::uint64_t parse_uint(std::string_view field, std::size_t line_no) {
    if (field.empty() || field.find_first_not_of("0123456789") != std::string_view::npos) {
        throw ParseError("expected a non-negative integer, got \"" + std::string(field) + "\"", line_no);
    }
    try {
        return std::stoull(std::string(field));
    } catch (const std::out_of_range&) {
        throw ParseError("integer out of range: \"" + std::string(field) + "\"", line_no);
    }
}

}  // namespace

void save_model(const TokenizerModel& model, std::ostream& out) {
    const std::string& name = model.split_pattern().name;
    if (name.empty() || name.find_first_of(" \t\r\n\"") != std::string::npos) {
        throw ConfigError("split pattern name \"" + name + "\" is not a valid identifier");
    }
    out << kHeader << '\n';
    out << "pattern " << name << ' ' << quote(model.split_pattern().source) << '\n';
    out << "stops " << model.stop_chunks().size() << '\n';
    for (const auto& chunk : model.stop_chunks()) {
        out << quote(chunk) << '\n';
    }
    for (const auto& e : model.merges().entries) {
        out << e.pair.first << ' ' << e.pair.second << '\n';
    }
}

void save_model(const TokenizerModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    save_model(model, out);
    if (!out) throw IoError("failed writing " + path);
}

TokenizerModel load_model(std::istream& in) {
    std::size_t line_no = 0;

    const std::string header = next_line(in, line_no, "header");
    if (header != kHeader) {
        throw ParseError("unknown model format or version: \"" + header + "\"", line_no);
    }

    const std::string pattern_line = next_line(in, line_no, "pattern line");
    if (pattern_line.rfind("pattern ", 0) != 0) {
        throw ParseError("expected \"pattern <name> <source>\"", line_no);
    }
    const std::size_t name_end = pattern_line.find(' ', 8);
    if (name_end == std::string::npos) {
        throw ParseError("expected \"pattern <name> <source>\"", line_no);
    }
    SplitPattern pattern;
    pattern.name = pattern_line.substr(8, name_end - 8);
    pattern.source = unquote(std::string_view(pattern_line).substr(name_end + 1), line_no);

    const std::string stops_line = next_line(in, line_no, "stops line");
    if (stops_line.rfind("stops ", 0) != 0) {
        throw ParseError("expected \"stops <count>\"", line_no);
    }
    const std::uint64_t stop_count = parse_uint(std::string_view(stops_line).substr(6), line_no);

    std::vector<std::string> stop_chunks;
    stop_chunks.reserve(stop_count);
    for (std::uint64_t i = 0; i < stop_count; ++i) {
        stop_chunks.push_back(unquote(next_line(in, line_no, "stop chunk"), line_no));
    }

    MergeTable table;
    const TokenId merge_base = kBaseVocabSize + static_cast<TokenId>(stop_chunks.size());
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const std::size_t sep = line.find(' ');
        if (sep == std::string::npos || line.find(' ', sep + 1) != std::string::npos) {
            throw ParseError("expected \"<first> <last>\"", line_no);
        }
        const std::uint64_t first = parse_uint(std::string_view(line).substr(0, sep), line_no);
        const std::uint64_t last = parse_uint(std::string_view(line).substr(sep + 1), line_no);

        const TokenId new_token = merge_base + static_cast<TokenId>(table.entries.size());
        for (std::uint64_t part : {first, last}) {
            if (part >= new_token) {
                throw ParseError("merge references undefined token " + std::to_string(part), line_no);
            }
            if (part >= kBaseVocabSize && part < merge_base) {
                throw ParseError("merge references stop token " + std::to_string(part), line_no);
            }
        }
        table.entries.push_back({{static_cast<TokenId>(first), static_cast<TokenId>(last)}, new_token});
    }

    return TokenizerModel(std::move(pattern), std::move(stop_chunks), std::move(table));
}

TokenizerModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return load_model(in);
}

}  // namespace batchtok
