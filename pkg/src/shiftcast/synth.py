"""Regime-switching AR generators with controlled transitional shifts.

Intra-series shift: each variable's own AR coefficients change at a regime
boundary. Inter-series shift: latent AR drivers are observed through a
mixing matrix that changes at the boundary, so the way one series depends on
the others moves while every driver's own dynamics may stay fixed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from shiftcast.data import RawSeries
from shiftcast.errors import UnstableRegime


@dataclass
class Regime:
    start: int
    ar: np.ndarray  # n_vars x p, ar[i, k] multiplies x_i[t - 1 - k]
    mixing: np.ndarray  # n_vars x n_vars, row-normalized to unit absolute sum


@dataclass
class ShiftScenario:
    n_vars: int
    n_steps: int
    regimes: list[Regime]
    noise_std: float = 1.0
    seed: int = 0
    init: np.ndarray | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_vars < 1 or self.n_steps < 1:
            raise ValueError("n_vars and n_steps must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if not self.regimes or self.regimes[0].start != 0:
            raise ValueError("first regime must start at step 0")
        starts = [r.start for r in self.regimes]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError(f"regime starts must be strictly increasing, got {starts}")
        for r in self.regimes:
            r.ar = np.atleast_2d(np.asarray(r.ar, dtype=np.float64))
            if r.ar.shape[0] == 1 and self.n_vars > 1:
                r.ar = np.repeat(r.ar, self.n_vars, axis=0)
            if r.ar.shape[0] != self.n_vars:
                raise ValueError(f"regime at {r.start}: AR block has {r.ar.shape[0]} rows")
            m = np.eye(self.n_vars) if r.mixing is None else np.asarray(r.mixing, dtype=np.float64)
            if m.shape != (self.n_vars, self.n_vars):
                raise ValueError(f"regime at {r.start}: mixing must be {self.n_vars}x{self.n_vars}")
            rows = np.abs(m).sum(axis=1, keepdims=True)
            if np.any(rows == 0):
                raise ValueError(f"regime at {r.start}: mixing has an all-zero row")
            r.mixing = m / rows
        if self.init is not None:
            self.init = np.asarray(self.init, dtype=np.float64).reshape(self.n_vars)

    @property
    def order(self) -> int:
        return max(r.ar.shape[1] for r in self.regimes)

    def regime_index(self, t: int) -> int:
        idx = 0
        for i, r in enumerate(self.regimes):
            if r.start <= t:
                idx = i
        return idx

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_vars": self.n_vars,
            "n_steps": self.n_steps,
            "noise_std": self.noise_std,
            "seed": self.seed,
            "init": None if self.init is None else self.init.tolist(),
            "regimes": [{"start": r.start, "ar": r.ar.tolist(), "mixing": r.mixing.tolist()}
                        for r in self.regimes],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ShiftScenario":
        regimes = [Regime(int(r["start"]), np.asarray(r["ar"], dtype=np.float64),
                          None if r.get("mixing") is None else np.asarray(r["mixing"], dtype=np.float64))
                   for r in obj["regimes"]]
        return cls(n_vars=int(obj["n_vars"]), n_steps=int(obj["n_steps"]), regimes=regimes,
                   noise_std=float(obj.get("noise_std", 1.0)), seed=int(obj.get("seed", 0)),
                   init=obj.get("init"), name=obj.get("name", ""))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "ShiftScenario":
        return cls.from_dict(json.loads(Path(path).read_text()))


def spectral_radius(coeffs: np.ndarray) -> float:
    """Largest root modulus of the AR companion matrix."""
    p = len(coeffs)
    if p == 0:
        return 0.0
    comp = np.zeros((p, p))
    comp[0] = coeffs
    comp[1:, :-1] = np.eye(p - 1)
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def check_stationary(scenario: ShiftScenario) -> None:
    for i, r in enumerate(scenario.regimes):
        for row in r.ar:
            rad = spectral_radius(row)
            if rad >= 1.0:
                raise UnstableRegime(i, rad)


def _drivers(scenario: ShiftScenario) -> np.ndarray:
    check_stationary(scenario)
    n, T, p = scenario.n_vars, scenario.n_steps, scenario.order
    rng = np.random.default_rng(scenario.seed)
    eps = rng.standard_normal((n, T)) * scenario.noise_std
    x = np.zeros((n, T + p))  # p zero-valued steps of pre-sample history
    if scenario.init is not None:
        x[:, p] = scenario.init
    regime_of = np.zeros(T, dtype=int)
    for i, r in enumerate(scenario.regimes):
        regime_of[r.start:] = i
    coeffs = []
    for r in scenario.regimes:
        c = np.zeros((n, p))
        c[:, :r.ar.shape[1]] = r.ar
        coeffs.append(c)
    first = 1 if scenario.init is not None else 0
    if first:
        x[:, p] += eps[:, 0]
    for t in range(first, T):
        c = coeffs[regime_of[t]]
        past = x[:, t + p - 1::-1][:, :p] if t + p - 1 >= 0 else np.zeros((n, p))
        x[:, t + p] = np.einsum("ik,ik->i", c, past) + eps[:, t]
    return x[:, p:]


def gen_intra_shift(scenario: ShiftScenario) -> RawSeries:
    """Each variable follows its active regime's AR recursion."""
    return RawSeries(_drivers(scenario), [f"x{i}" for i in range(scenario.n_vars)], "step")


def gen_inter_shift(scenario: ShiftScenario) -> RawSeries:
    """Observed series are the active regime's mixing matrix applied to AR drivers."""
    d = _drivers(scenario)
    out = np.empty_like(d)
    for i, r in enumerate(scenario.regimes):
        stop = scenario.regimes[i + 1].start if i + 1 < len(scenario.regimes) else scenario.n_steps
        out[:, r.start:stop] = r.mixing @ d[:, r.start:stop]
    return RawSeries(out, [f"x{i}" for i in range(scenario.n_vars)], "step")


def ground_truth_graph(scenario: ShiftScenario, t: int) -> np.ndarray:
    """Row-normalized ``|mixing|`` of the regime active at step ``t``.

    A boundary step belongs to the regime that starts there.
    """
    if not 0 <= t < scenario.n_steps:
        raise IndexError(f"step {t} outside [0, {scenario.n_steps})")
    m = np.abs(scenario.regimes[scenario.regime_index(t)].mixing)
    return m / m.sum(axis=1, keepdims=True)
