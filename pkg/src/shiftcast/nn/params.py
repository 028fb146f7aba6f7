"""Named parameter storage with fan-in uniform init and JSON checkpoints."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from shiftcast.errors import ShapeMismatch
from shiftcast.nn.autodiff import Tensor
from shiftcast.nn.rng import RngStream

FORMAT = "shiftcast-params"
VERSION = 1


@dataclass
class Param:
    tensor: Tensor
    fan_in: int

    @property
    def shape(self) -> tuple:
        return self.tensor.shape


class ParamStore:
    """Ordered mapping of parameter name to a trainable leaf tensor."""

    def __init__(self):
        self._params: dict[str, Param] = {}

    def add(self, name: str, shape: tuple, fan_in: int, rng: RngStream | None = None) -> Tensor:
        """Register a parameter drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
        if name in self._params:
            raise KeyError(f"duplicate parameter {name!r}")
        if rng is None:
            values = np.zeros(shape)
        else:
            bound = 1.0 / math.sqrt(fan_in)
            values = (2.0 * rng.child(name).uniform(shape) - 1.0) * bound
        t = Tensor(values, requires_grad=True, name=name)
        self._params[name] = Param(t, fan_in)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name].tensor

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def tensors(self) -> list[Tensor]:
        return [p.tensor for p in self._params.values()]

    def items(self):
        return ((k, p.tensor) for k, p in self._params.items())

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.tensor.grad = None

    def n_values(self) -> int:
        return sum(p.tensor.data.size for p in self._params.values())

    def state(self) -> dict[str, np.ndarray]:
        return {k: p.tensor.data.copy() for k, p in self._params.items()}

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        missing = set(self._params) ^ set(state)
        if missing:
            raise KeyError(f"parameter names differ: {sorted(missing)}")
        for k, v in state.items():
            v = np.asarray(v, dtype=np.float64)
            if v.shape != self._params[k].shape:
                raise ShapeMismatch(f"{k}: expected {self._params[k].shape}, got {v.shape}")
            self._params[k].tensor.data = v.copy()

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "params": {k: {"shape": list(p.shape), "values": p.tensor.data.ravel().tolist()}
                       for k, p in self._params.items()},
        }


def state_to_json(state: dict[str, np.ndarray]) -> dict:
    return {k: {"shape": list(v.shape), "values": v.ravel().tolist()} for k, v in state.items()}


def state_from_json(obj: dict) -> dict[str, np.ndarray]:
    return {k: np.array(v["values"], dtype=np.float64).reshape(v["shape"]) for k, v in obj.items()}


def save_params(store: ParamStore, path: str | Path) -> None:
    Path(path).write_text(json.dumps(store.to_dict()))


def load_params(store: ParamStore, path: str | Path) -> None:
    obj = json.loads(Path(path).read_text())
    if obj.get("format") != FORMAT or obj.get("version") != VERSION:
        raise ValueError(f"unsupported parameter file {path}")
    store.load_state(state_from_json(obj["params"]))
