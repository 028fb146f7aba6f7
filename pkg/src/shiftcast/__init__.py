"""Multivariate forecasting under intra-/inter-series transitional shift."""
from shiftcast.config import TrainConfig
from shiftcast.data import (
    NormStats,
    RawSeries,
    SplitSpec,
    WindowPair,
    adf_statistic,
    load_csv,
    make_windows,
    split,
    zscore_apply,
    zscore_fit,
    zscore_invert,
)
from shiftcast.model import JointPGM
from shiftcast.train import Checkpoint, Metrics, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "TrainConfig",
    "NormStats",
    "RawSeries",
    "SplitSpec",
    "WindowPair",
    "adf_statistic",
    "load_csv",
    "make_windows",
    "split",
    "zscore_apply",
    "zscore_fit",
    "zscore_invert",
    "JointPGM",
    "Checkpoint",
    "Metrics",
    "evaluate",
    "train",
]
