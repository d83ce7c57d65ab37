"""CFOF outlier detection: exact and sampled scores, baselines, theory and evaluation."""
from .dataset import Dataset, DatasetError, load, load_binary, load_csv, save, save_binary, save_csv
from .exact import hard_cfof, neighbor_ranks, rnn_counts, soft_cfof_oracle
from .fast import FastParams, fast_cfof, sample_size
from .scoreset import ScoreSet

__all__ = [
    "Dataset", "DatasetError", "load", "load_binary", "load_csv", "save", "save_binary",
    "save_csv", "hard_cfof", "neighbor_ranks", "rnn_counts", "soft_cfof_oracle",
    "FastParams", "fast_cfof", "sample_size", "ScoreSet",
]
