"""BPE tokenizer training with batched merges and histogram-backed corpora."""

from ._core import (
    ChunkHistogram,
    ConfigError,
    CorpusStats,
    CountingMode,
    DecodeError,
    ParseError,
    TokenizerModel,
    TrainConfig,
    TrainError,
    TrainReport,
    apply_freq_cutoff,
    build_histogram,
    compute_stats,
    extract_stop_list,
    load_histogram_csv,
    load_model,
    merge_histograms,
    save_histogram_csv,
    split_text,
    train,
    train_serial_reference,
)

__all__ = [
    "ChunkHistogram",
    "ConfigError",
    "CorpusStats",
    "CountingMode",
    "DecodeError",
    "ParseError",
    "TokenizerModel",
    "TrainConfig",
    "TrainError",
    "TrainReport",
    "apply_freq_cutoff",
    "build_histogram",
    "compute_stats",
    "extract_stop_list",
    "load_histogram_csv",
    "load_model",
    "merge_histograms",
    "save_histogram_csv",
    "split_text",
    "train",
    "train_serial_reference",
]
