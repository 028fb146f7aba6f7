"""Splittable, label-keyed random streams."""
from __future__ import annotations

import hashlib

import numpy as np


def _label_key(label) -> int:
    if isinstance(label, (int, np.integer)) and label >= 0:
        return int(label)
    digest = hashlib.sha256(repr(label).encode()).digest()
    return int.from_bytes(digest[:8], "little")


class RngStream:
    """A reproducible random stream identified by ``(seed, path)``.

    ``child(*labels)`` derives an independent stream whose draws depend only on
    the seed and the label path, never on how many draws the parent has made.
    ``counter`` counts draws made from this stream.
    """

    def __init__(self, seed: int, path: tuple = ()):
        self.seed = int(seed) & (2**64 - 1)
        self.path = tuple(path)
        self.counter = 0
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(_label_key(p) for p in self.path))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def child(self, *labels) -> "RngStream":
        return RngStream(self.seed, self.path + labels)

    def normal(self, shape) -> np.ndarray:
        self.counter += 1
        return self._gen.standard_normal(shape)

    def uniform(self, shape) -> np.ndarray:
        self.counter += 1
        return self._gen.random(shape)

    def permutation(self, n: int) -> np.ndarray:
        self.counter += 1
        return self._gen.permutation(n)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path}, counter={self.counter})"
