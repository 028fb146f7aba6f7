"""Series ingestion, chronological splitting, z-scoring, windowing and ADF."""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from shiftcast.errors import (
    DegenerateVariable,
    EmptyFile,
    NonNumericCell,
    RaggedRows,
    SeriesTooShort,
    SingularRegression,
    SliceTooShort,
)

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class RawSeries:
    """``values`` is N x T: one row per variable, one column per time step."""

    values: np.ndarray
    variable_names: list[str] = field(default_factory=list)
    interval: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"series must be a non-empty N x T matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("series contains non-finite values")
        object.__setattr__(self, "values", v)
        if not self.variable_names:
            object.__setattr__(self, "variable_names", [f"x{i}" for i in range(v.shape[0])])
        elif len(self.variable_names) != v.shape[0]:
            raise ValueError("variable_names length does not match number of rows")

    @property
    def n_vars(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    def slice(self, start: int, stop: int) -> "RawSeries":
        return RawSeries(self.values[:, start:stop], list(self.variable_names), self.interval)

    def with_values(self, values: np.ndarray) -> "RawSeries":
        return RawSeries(values, list(self.variable_names), self.interval)


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray
    std: np.ndarray

    def to_json(self) -> str:
        return json.dumps({"mean": self.mean.tolist(), "std": self.std.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "NormStats":
        obj = json.loads(text)
        return cls(np.array(obj["mean"], dtype=np.float64), np.array(obj["std"], dtype=np.float64))


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.7
    val_frac: float = 0.1
    test_frac: float = 0.2

    def __post_init__(self):
        fr = (self.train_frac, self.val_frac, self.test_frac)
        if min(fr) <= 0 or abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must be positive and sum to 1, got {fr}")


@dataclass(frozen=True)
class WindowPair:
    lookback: np.ndarray  # N x L
    horizon: np.ndarray  # N x H
    anchor: int


def load_csv(path: str | Path, header: bool = True, drop_columns: Sequence[str] = ("date",),
             interval: str = "") -> RawSeries:
    """Read a CSV with one row per time step and one column per variable.

    Header columns named in ``drop_columns`` (case-insensitive) are discarded,
    which lets timestamped benchmark files load without preprocessing.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows or (header and len(rows) < 2):
        raise EmptyFile(f"{path} has no data rows")
    names = None
    offset = 0
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        offset = 1
    width = len(names) if names is not None else len(rows[0])
    drop = {c.lower() for c in drop_columns}
    keep = [j for j in range(width) if names is None or names[j].lower() not in drop]
    out = np.empty((len(rows), len(keep)))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise RaggedRows(f"row {i + offset} has {len(row)} columns, expected {width}")
        for k, j in enumerate(keep):
            try:
                out[i, k] = float(row[j])
            except ValueError:
                raise NonNumericCell(i + offset, j, row[j]) from None
    if not np.all(np.isfinite(out)):
        bad = np.argwhere(~np.isfinite(out))[0]
        raise NonNumericCell(int(bad[0]) + offset, keep[int(bad[1])], rows[bad[0]][keep[bad[1]]])
    var_names = [names[j] for j in keep] if names is not None else []
    return RawSeries(out.T.copy(), var_names, interval)


def save_csv(series: RawSeries, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(series.variable_names)
        for row in series.values.T:
            w.writerow([repr(float(v)) for v in row])


def split_lengths(n_steps: int, spec: SplitSpec) -> tuple[int, int, int]:
    n_train = math.floor(n_steps * spec.train_frac)
    n_val = math.floor(n_steps * spec.val_frac)
    return n_train, n_val, n_steps - n_train - n_val


def split(raw: RawSeries, spec: SplitSpec = SplitSpec(), min_len: int = 1
          ) -> tuple[RawSeries, RawSeries, RawSeries]:
    """Contiguous chronological train/val/test slices; the remainder goes to test."""
    n_train, n_val, n_test = split_lengths(raw.n_steps, spec)
    for name, n in (("train", n_train), ("val", n_val), ("test", n_test)):
        if n < min_len:
            raise SliceTooShort(name, n, min_len)
    return (raw.slice(0, n_train), raw.slice(n_train, n_train + n_val),
            raw.slice(n_train + n_val, raw.n_steps))


def zscore_fit(train: RawSeries) -> NormStats:
    mean = train.values.mean(axis=1)
    std = train.values.std(axis=1)
    low = std < STD_FLOOR
    if np.any(low):
        names = [train.variable_names[i] for i in np.flatnonzero(low)]
        warnings.warn(f"constant variables {names}; std floored to {STD_FLOOR}", DegenerateVariable,
                      stacklevel=2)
        std = np.where(low, STD_FLOOR, std)
    return NormStats(mean, std)


def zscore_apply(series: RawSeries, stats: NormStats) -> RawSeries:
    return series.with_values((series.values - stats.mean[:, None]) / stats.std[:, None])


def zscore_invert(series: RawSeries, stats: NormStats) -> RawSeries:
    return series.with_values(series.values * stats.std[:, None] + stats.mean[:, None])


def n_windows(n_steps: int, L: int, H: int, stride: int = 1) -> int:
    return max(0, (n_steps - L - H) // stride + 1)


def make_windows(series: RawSeries, L: int, H: int, stride: int = 1,
                 name: str = "series") -> list[WindowPair]:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if series.n_steps < L + H:
        raise SliceTooShort(name, series.n_steps, L + H)
    v = series.values
    return [WindowPair(v[:, t - L:t], v[:, t:t + H], t)
            for t in range(L, series.n_steps - H + 1, stride)]


def stack_windows(windows: Sequence[WindowPair]) -> tuple[np.ndarray, np.ndarray]:
    """Batch arrays ``(W, N, L)`` and ``(W, N, H)``."""
    return (np.stack([w.lookback for w in windows]), np.stack([w.horizon for w in windows]))


def default_max_lag(n_steps: int) -> int:
    return int(round(12 * (n_steps / 100.0) ** 0.25))


def adf_statistic(series: np.ndarray, max_lag: int) -> float:
    """Dickey-Fuller t-statistic with a constant and ``max_lag`` lagged differences.

    Regresses ``dx_t`` on ``[1, x_{t-1}, dx_{t-1}, ..., dx_{t-max_lag}]`` by OLS
    and returns the t-ratio of the ``x_{t-1}`` coefficient. More negative means
    stronger evidence against a unit root.
    """
    x = np.asarray(series, dtype=np.float64).ravel()
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if x.size <= max_lag + 2:
        raise SeriesTooShort(f"series of length {x.size} too short for max_lag={max_lag}")
    dx = np.diff(x)
    y = dx[max_lag:]
    n = y.size
    cols = [np.ones(n), x[max_lag:-1]]
    cols += [dx[max_lag - k:-k] for k in range(1, max_lag + 1)]
    X = np.column_stack(cols)
    if n <= X.shape[1]:
        raise SeriesTooShort(f"only {n} observations for {X.shape[1]} regressors")
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-10 * diag.max():
        raise SingularRegression("design matrix is singular (constant series?)")
    beta = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ beta
    sigma2 = resid @ resid / (n - X.shape[1])
    Rinv = np.linalg.inv(R)
    se = math.sqrt(sigma2 * (Rinv[1] @ Rinv[1]))
    if se == 0.0:
        raise SingularRegression("zero standard error for the lagged level")
    return float(beta[1] / se)
