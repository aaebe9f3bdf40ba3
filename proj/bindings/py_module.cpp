#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "batchtok/codec.hpp"
#include "batchtok/errors.hpp"
#include "batchtok/experiments.hpp"
#include "batchtok/histogram.hpp"
#include "batchtok/ingest.hpp"
#include "batchtok/model_io.hpp"
#include "batchtok/trainer.hpp"

namespace py = pybind11;
using namespace batchtok;

namespace {

SplitPattern pattern_arg(const std::string& name, const std::string& source) {
    if (source.empty()) {
        if (name != "gpt4") {
            throw ConfigError("unknown built-in pattern \"" + name + "\"; pass a source for custom patterns");
        }
        return SplitPattern::gpt4();
    }
    return SplitPattern::custom(name, source);
}

py::bytes chunk_bytes(const std::string& s) { return py::bytes(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "BPE tokenizer training with batched merges and histogram-backed corpora";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<TrainError>(m, "TrainError", PyExc_RuntimeError);
    py::register_exception<DecodeError>(m, "DecodeError", PyExc_ValueError);

    m.def(
        "split_text",
        [](const std::string& text, const std::string& pattern, const std::string& source) {
            return split_text(text, pattern_arg(pattern, source));
        },
        py::arg("text"), py::arg("pattern") = "gpt4", py::arg("source") = "");

    py::enum_<CountingMode>(m, "CountingMode")
        .value("NON_OVERLAPPING", CountingMode::NonOverlapping)
        .value("OVERCOUNT", CountingMode::Overcount);

    py::class_<ChunkHistogram>(m, "ChunkHistogram")
        .def(py::init<std::string>(), py::arg("pattern_name") = "gpt4")
        .def("add", &ChunkHistogram::add, py::arg("chunk"), py::arg("count") = 1)
        .def("count", &ChunkHistogram::count)
        .def("total", &ChunkHistogram::total)
        .def("unique", &ChunkHistogram::unique)
        .def_property_readonly("split_pattern_name", &ChunkHistogram::split_pattern_name)
        .def("entries",
             [](const ChunkHistogram& h) {
                 py::dict out;
                 for (const auto& [chunk, count] : h.entries()) out[chunk_bytes(chunk)] = count;
                 return out;
             })
        .def("__eq__", [](const ChunkHistogram& a, const ChunkHistogram& b) { return a == b; })
        .def("__len__", &ChunkHistogram::unique);

    m.def(
        "build_histogram",
        [](const std::vector<std::string>& documents, const std::string& pattern, const std::string& source) {
            return build_histogram(documents, pattern_arg(pattern, source));
        },
        py::arg("documents"), py::arg("pattern") = "gpt4", py::arg("source") = "");
    m.def("merge_histograms", &merge_histograms);
    m.def("apply_freq_cutoff", &apply_freq_cutoff);
    m.def("extract_stop_list", &extract_stop_list);
    m.def(
        "save_histogram_csv",
        [](const ChunkHistogram& h, const std::string& path) { save_csv(h, path); },
        py::arg("histogram"), py::arg("path"));
    m.def(
        "load_histogram_csv",
        [](const std::string& path, const std::string& pattern_name) { return load_csv(path, pattern_name); },
        py::arg("path"), py::arg("pattern_name") = "gpt4");

    py::class_<CorpusStats>(m, "CorpusStats")
        .def_readonly("total_chunks", &CorpusStats::total_chunks)
        .def_readonly("unique_chunks", &CorpusStats::unique_chunks)
        .def_readonly("unique_fraction", &CorpusStats::unique_fraction)
        .def_readonly("top_k", &CorpusStats::top_k)
        .def_readonly("top_k_share", &CorpusStats::top_k_share)
        .def_readonly("frequency_histogram", &CorpusStats::frequency_histogram);
    m.def("compute_stats", &compute_stats, py::arg("histogram"), py::arg("top_k"),
          py::arg("tail_bucket_start") = 16);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init([](std::uint32_t vocab_size, std::uint32_t stop_list_size, std::uint64_t freq_cutoff,
                         std::uint32_t cap_divisor, std::uint32_t max_batch_size, CountingMode counting_mode,
                         bool naive_batching) {
                 TrainConfig c;
                 c.vocab_size = vocab_size;
                 c.stop_list_size = stop_list_size;
                 c.freq_cutoff = freq_cutoff;
                 c.cap_divisor = cap_divisor;
                 c.max_batch_size = max_batch_size == 0 ? kUnboundedBatch : max_batch_size;
                 c.counting_mode = counting_mode;
                 c.naive_batching = naive_batching;
                 return c;
             }),
             py::arg("vocab_size"), py::arg("stop_list_size") = 0, py::arg("freq_cutoff") = 1,
             py::arg("cap_divisor") = 2, py::arg("max_batch_size") = 0,
             py::arg("counting_mode") = CountingMode::NonOverlapping, py::arg("naive_batching") = false)
        .def_readwrite("vocab_size", &TrainConfig::vocab_size)
        .def_readwrite("stop_list_size", &TrainConfig::stop_list_size)
        .def_readwrite("freq_cutoff", &TrainConfig::freq_cutoff)
        .def_readwrite("cap_divisor", &TrainConfig::cap_divisor)
        .def_readwrite("max_batch_size", &TrainConfig::max_batch_size)
        .def_readwrite("counting_mode", &TrainConfig::counting_mode)
        .def_readwrite("naive_batching", &TrainConfig::naive_batching);

    py::class_<TrainReport>(m, "TrainReport")
        .def_readonly("batch_sizes", &TrainReport::batch_sizes)
        .def_readonly("pass_count", &TrainReport::pass_count)
        .def_readonly("merges_made", &TrainReport::merges_made)
        .def_readonly("wall_time_s", &TrainReport::wall_time_s)
        .def_readonly("exhausted", &TrainReport::exhausted)
        .def_readonly("warning", &TrainReport::warning)
        .def("mean_batch_size", &TrainReport::mean_batch_size)
        .def("max_batch_size", &TrainReport::max_batch_size);

    py::class_<TokenizerModel>(m, "TokenizerModel")
        .def_property_readonly("vocab_size", &TokenizerModel::vocab_size)
        .def_property_readonly("stop_chunks",
                               [](const TokenizerModel& model) {
                                   py::list out;
                                   for (const auto& chunk : model.stop_chunks()) out.append(chunk_bytes(chunk));
                                   return out;
                               })
        .def_property_readonly("merges",
                               [](const TokenizerModel& model) {
                                   py::list out;
                                   for (const auto& e : model.merges().entries) {
                                       out.append(py::make_tuple(e.pair.first, e.pair.second, e.new_token));
                                   }
                                   return out;
                               })
        .def("token_bytes",
             [](const TokenizerModel& model, TokenId id) {
                 if (!model.defined(id)) throw DecodeError("unknown token id " + std::to_string(id));
                 return chunk_bytes(model.token_bytes(id));
             })
        .def("encode", [](const TokenizerModel& model, const std::string& text) { return encode(text, model); })
        .def("encode_chunk",
             [](const TokenizerModel& model, const std::string& chunk) { return encode_chunk(chunk, model); })
        .def(
            "decode",
            [](const TokenizerModel& model, const std::vector<TokenId>& ids, bool strict) {
                return decode(ids, model, strict ? Utf8Policy::Strict : Utf8Policy::Replace);
            },
            py::arg("ids"), py::arg("strict") = false)
        .def("encoded_length",
             [](const TokenizerModel& model, const std::string& text) { return encoded_length(text, model); })
        .def("save", [](const TokenizerModel& model, const std::string& path) { save_model(model, path); })
        .def("__eq__", [](const TokenizerModel& a, const TokenizerModel& b) { return a == b; });

    m.def("load_model", [](const std::string& path) { return load_model(path); });

    m.def(
        "train",
        [](const ChunkHistogram& h, const TrainConfig& config, unsigned threads) {
            TrainResult result = train(h, config, threads);
            return py::make_tuple(std::move(result.model), std::move(result.report));
        },
        py::arg("histogram"), py::arg("config"), py::arg("threads") = 1);

    m.def("train_serial_reference", [](const ChunkHistogram& h, const TrainConfig& config) {
        py::list out;
        for (const auto& e : train_serial_reference(h, config).entries) {
            out.append(py::make_tuple(e.pair.first, e.pair.second, e.new_token));
        }
        return out;
    });
}
